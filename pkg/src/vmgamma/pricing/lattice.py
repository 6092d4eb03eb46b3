"""Recombining multinomial lattice driven by the Levy measure of Y.

One time step moves the factor state by a node offset ``o`` with probability
``p(o) = dt * Pi_Y(cell around o)``; the central node keeps the remaining
mass. The state grid is fixed and transitions leaving it are lumped onto the
nearest boundary node. Prices follow from ``S = S0 exp(drift t + A y)``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft
from scipy.special import roots_legendre

from ..errors import LatticeError, ValidationError
from ..process import as_params
from ..transforms import MarketModel
from .levy import levy_components
from .options import OptionSpec, PriceResult, payoff

__all__ = ["LatticeSpec", "TransitionKernel", "build_lattice", "LatticePricer", "price_lattice"]

logger = logging.getLogger(__name__)

# tensor Gauss-Legendre order per cell and sub-division of cells near the origin
_ORDER_AREA = 8
_ORDER_LINE = 16
_NEAR_RING = 2
_NEAR_SUB = 4


@dataclass(frozen=True)
class LatticeSpec:
    counts: tuple = (127, 127)
    steps: tuple = (4.92e-3, 8.37e-3)
    dt: float = 1.25e-3
    boundary: str = "clip_to_boundary"

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        steps = tuple(float(s) for s in self.steps)
        if len(counts) != len(steps):
            raise ValidationError("counts and steps must have the same length")
        if any(c < 3 or c % 2 == 0 for c in counts):
            raise ValidationError(f"counts: each axis needs an odd count >= 3, got {counts}")
        if any(not s > 0 for s in steps):
            raise ValidationError("steps: must be positive")
        if not self.dt > 0:
            raise ValidationError("dt: must be positive")
        if self.boundary != "clip_to_boundary":
            raise ValidationError(f"boundary: only 'clip_to_boundary' is supported, got {self.boundary!r}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def half_width(self) -> tuple:
        """Largest kernel offset per axis; any node can reach any other in one step."""
        return tuple(c - 1 for c in self.counts)

    def n_steps(self, maturity: float) -> int:
        n = int(round(maturity / self.dt))
        if n < 1 or abs(n * self.dt - maturity) > 1e-12:
            raise ValidationError(f"dt={self.dt} does not divide the maturity {maturity}")
        return n


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """One-step transition probabilities indexed by node offset.

    ``probs`` has shape ``(2P_1 + 1, ..., 2P_d + 1)``; the centre entry is the
    probability of staying put.
    """

    probs: np.ndarray
    steps: np.ndarray
    dt: float
    patch: np.ndarray = field(default=None)

    @property
    def half_width(self) -> tuple:
        return tuple((s - 1) // 2 for s in self.probs.shape)

    @property
    def p0(self) -> float:
        return float(self.probs[self.half_width])

    def offsets(self):
        """Offset coordinates in Y-space, one mesh per axis."""
        axes = [np.arange(-P, P + 1) * h for P, h in zip(self.half_width, self.steps)]
        return np.meshgrid(*axes, indexing="ij")

    def moment(self, order: int) -> np.ndarray:
        """Raw one-step moment ``sum p(o) o_k^order`` per axis."""
        return np.array([float(np.sum(self.probs * g ** order)) for g in self.offsets()])

    def char_function(self, theta) -> np.ndarray:
        """``sum_o p(o) exp(i <theta, o>)``; ``theta`` has trailing dimension ``d``."""
        theta = np.asarray(theta, dtype=float)
        pts = np.stack([g.ravel() for g in self.offsets()], axis=1)
        phase = theta.reshape(-1, theta.shape[-1]) @ pts.T
        out = np.exp(1j * phase) @ self.probs.ravel()
        return out.reshape(theta.shape[:-1]) if theta.ndim > 1 else complex(out[0])


def _gl_cells(log_density, lo, hi, order, sub):
    """Integrate ``exp(log_density)`` over boxes ``[lo, hi]`` (shape ``(C, m)``) by tensor GL."""
    x, w = roots_legendre(order)
    m = lo.shape[1]
    # nodes on [0, 1] for a single sub-box, then tiled over the sub-division
    u = (x + 1.0) / 2.0
    wu = w / 2.0
    ref = (np.arange(sub)[:, None] + u[None, :]).ravel() / sub
    wref = np.tile(wu, sub) / sub
    mesh = np.meshgrid(*([ref] * m), indexing="ij")
    wmesh = np.ones_like(mesh[0])
    for g in np.meshgrid(*([wref] * m), indexing="ij"):
        wmesh = wmesh * g
    nodes = np.stack([g.ravel() for g in mesh], axis=1)  # (Q, m)
    wts = wmesh.ravel()
    width = hi - lo
    total = np.empty(lo.shape[0])
    block = max(1, 2_000_000 // nodes.shape[0])
    for s in range(0, lo.shape[0], block):
        e = s + block
        pts = lo[s:e, None, :] + nodes[None, :, :] * width[s:e, None, :]
        vals = np.exp(log_density(pts))
        total[s:e] = (vals @ wts) * np.prod(width[s:e], axis=1)
    return total


def _component_masses(comp, half, steps):
    """Levy mass of every non-central cell of the sub-lattice spanned by ``comp.support``."""
    J = comp.support
    shape = tuple(2 * half[k] + 1 for k in J)
    idx = np.stack([g.ravel() for g in np.meshgrid(*[np.arange(-half[k], half[k] + 1) for k in J],
                                                     indexing="ij")], axis=1)
    h = np.array([steps[k] for k in J])
    centre = np.all(idx == 0, axis=1)
    ring = np.max(np.abs(idx), axis=1)
    lo = (idx - 0.5) * h
    hi = (idx + 0.5) * h
    out = np.zeros(idx.shape[0])
    order = _ORDER_LINE if comp.dim == 1 else _ORDER_AREA
    near = (~centre) & (ring <= _NEAR_RING)
    far = ring > _NEAR_RING
    if np.any(far):
        out[far] = _gl_cells(comp.log_density, lo[far], hi[far], order, 1)
    if np.any(near):
        out[near] = _gl_cells(comp.log_density, lo[near], hi[near], order, _NEAR_SUB)
    return out.reshape(shape)


def build_lattice(q_market, spec: LatticeSpec = LatticeSpec()) -> TransitionKernel:
    """One-step kernel for the factor process under the pricing measure.

    Each component of the Levy measure is integrated over the cells of the
    node offsets on its support. The central probability is the complement,
    and the one-step mean is matched to ``dt * sum_l mu⋄M_l`` by moving mass
    between the central node's immediate neighbours.

    Raises
    ------
    LatticeError
        If the central probability is negative (``dt`` too large) or the mean
        correction would make a neighbour probability negative.
    """
    params = as_params(q_market)
    d = params.d
    if len(spec.counts) != d:
        raise ValidationError(f"lattice spec has {len(spec.counts)} axes but Y has dimension {d}")
    half = spec.half_width
    steps = np.array(spec.steps)
    probs = np.zeros(tuple(2 * P + 1 for P in half))
    for comp in levy_components(params):
        masses = spec.dt * _component_masses(comp, half, steps)
        sl = tuple(slice(None) if k in comp.support else half[k] for k in range(d))
        probs[sl] += masses
    centre = tuple(half)
    probs[centre] = 0.0

    kernel = TransitionKernel(probs=probs, steps=steps, dt=spec.dt)
    target = spec.dt * params.column_drift.sum(axis=1)
    current = kernel.moment(1)
    patch = (target - current) / (2.0 * steps)
    for k in range(d):
        plus = list(centre)
        minus = list(centre)
        plus[k] += 1
        minus[k] -= 1
        probs[tuple(plus)] += patch[k]
        probs[tuple(minus)] -= patch[k]
        if probs[tuple(plus)] < 0 or probs[tuple(minus)] < 0:
            raise LatticeError(f"mean correction {patch[k]:.3e} on axis {k} exceeds the neighbour mass; "
                               "use a finer step or smaller dt")
    p0 = 1.0 - probs.sum()
    if p0 < 0:
        raise LatticeError(f"central probability {p0:.3e} is negative; reduce dt")
    probs[centre] = p0
    probs.setflags(write=False)
    logger.debug("kernel built: p0=%.6f patch=%s", p0, patch)
    return TransitionKernel(probs=probs, steps=steps, dt=spec.dt, patch=patch)


def _fold(full, half, counts):
    """Lump the out-of-grid part of a full convolution onto the boundary nodes."""
    out = full
    for a, (P, n) in enumerate(zip(half, counts)):
        out = np.moveaxis(out, a, 0)
        core = out[P:P + n].copy()
        core[0] += out[:P].sum(axis=0)
        core[-1] += out[P + n:].sum(axis=0)
        out = np.moveaxis(core, 0, a)
    return out


class LatticePricer:
    """Backward induction on a fixed node grid with a cached kernel transform."""

    def __init__(self, q_market: MarketModel, spec: LatticeSpec = LatticeSpec(), kernel=None):
        self.market = q_market
        self.spec = spec
        self.kernel = build_lattice(q_market, spec) if kernel is None else kernel
        self._half = self.kernel.half_width
        self._counts = spec.counts
        self._shape = tuple(fft.next_fast_len(n + 2 * P, real=True)
                            for n, P in zip(self._counts, self._half))
        axes = tuple(range(len(self._counts)))
        flipped = self.kernel.probs[tuple(slice(None, None, -1) for _ in axes)]
        self._kf_back = fft.rfftn(flipped, s=self._shape, axes=axes)
        self._kf_fwd = fft.rfftn(self.kernel.probs, s=self._shape, axes=axes)
        grids = np.meshgrid(*[np.arange(-(n // 2), n // 2 + 1) * h
                              for n, h in zip(self._counts, spec.steps)], indexing="ij")
        y = np.stack(grids, axis=-1)
        self._Ay = y @ q_market.A.T
        self._root = tuple(n // 2 for n in self._counts)
        self._boundary = {}

    def _apply(self, V):
        pad = np.pad(V, [(P, P) for P in self._half], mode="edge")
        axes = tuple(range(V.ndim))
        full = fft.irfftn(fft.rfftn(pad, s=self._shape, axes=axes) * self._kf_back,
                          s=self._shape, axes=axes)
        return full[tuple(slice(2 * P, 2 * P + n) for P, n in zip(self._half, self._counts))]

    def spot_grid(self, t: float) -> np.ndarray:
        """Asset prices at every node at time ``t``; shape ``counts + (k,)``."""
        return self.market.S0 * np.exp(self.market.drift * t + self._Ay)

    def boundary_mass(self, n_steps: int) -> float:
        """Probability mass lumped onto the boundary over ``n_steps`` forward steps from the root."""
        if n_steps not in self._boundary:
            D = np.zeros(self._counts)
            D[self._root] = 1.0
            axes = tuple(range(D.ndim))
            lumped = 0.0
            for _ in range(n_steps):
                full = fft.irfftn(fft.rfftn(D, s=self._shape, axes=axes) * self._kf_fwd,
                                  s=self._shape, axes=axes)
                full = full[tuple(slice(0, n + 2 * P) for n, P in zip(self._counts, self._half))]
                core = full[tuple(slice(P, P + n) for P, n in zip(self._half, self._counts))]
                lumped += float(full.sum() - core.sum())
                D = _fold(full, self._half, self._counts)
            self._boundary[n_steps] = max(lumped, 0.0)
        return self._boundary[n_steps]

    def price(self, option: OptionSpec, diagnostics: bool = True) -> PriceResult:
        N = self.spec.n_steps(option.maturity)
        dt = self.spec.dt
        disc = np.exp(-self.market.r * dt)
        V = payoff(option, self.spot_grid(N * dt))
        for i in range(N - 1, -1, -1):
            V = disc * self._apply(V)
            if option.is_american:
                V = np.maximum(V, payoff(option, self.spot_grid(i * dt)))
        price = max(float(V[self._root]), 0.0)
        diag = {"steps": N, "p0": self.kernel.p0}
        if diagnostics:
            diag["boundary_mass"] = self.boundary_mass(N)
        return PriceResult(price=price, method="lattice", diagnostics=diag)


def price_lattice(q_market: MarketModel, option: OptionSpec, spec: LatticeSpec = LatticeSpec()) -> PriceResult:
    """Price a best-of or worst-of put on the lattice (European or American)."""
    return LatticePricer(q_market, spec).price(option)
