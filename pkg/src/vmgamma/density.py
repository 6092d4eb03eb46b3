"""Densities of the subordinator, the factor process and the log-return process.

Two independent routes are provided: Fourier inversion of the characteristic
function on a regular grid (any ``k``), and direct quadrature of the
transition-density integrals for structured parameter sets whose ``M`` is a
diagonal block plus one common column.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, ValidationError
from .process import VMGammaParams, as_params
from .special import log_bessel_k, log_gamma_fn
from .transforms import MarketModel, cov_R, mean_R

__all__ = [
    "DensityGrid",
    "StructuredParams",
    "AliasingWarning",
    "SingularityWarning",
    "density_R_fft",
    "structured",
    "density_T_quadrature",
    "density_Y_quadrature",
    "vg1_density",
]


class AliasingWarning(UserWarning):
    """The characteristic function has not decayed at the Nyquist frequency."""


class SingularityWarning(UserWarning):
    """An integrable endpoint singularity is present (Gamma shape ``t*b <= 1``)."""


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Density values on a regular grid.

    ``values[i, j, ...]`` is the density at ``origin + (i, j, ...) * spacing``.
    ``raw_mass`` is the Riemann mass straight out of the inversion and
    ``clipped_mass`` the total mass of the negative lobes removed before
    renormalisation.
    """

    origin: np.ndarray
    spacing: np.ndarray
    counts: tuple
    values: np.ndarray
    t: float
    raw_mass: float = 1.0
    clipped_mass: float = 0.0
    nyquist_modulus: float = 0.0

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [o + np.arange(c) * h for o, h, c in zip(self.origin, self.spacing, self.counts)]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def mean(self) -> np.ndarray:
        w = self.values * self.cell_volume
        return np.array([float((w * g).sum()) for g in self.mesh()])

    def cov(self) -> np.ndarray:
        w = self.values * self.cell_volume
        mesh = self.mesh()
        mu = self.mean()
        k = len(mesh)
        C = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                C[i, j] = C[j, i] = float((w * (mesh[i] - mu[i]) * (mesh[j] - mu[j])).sum())
        return C

    def points(self):
        """Grid nodes as an ``(N, k)`` array in ``values.ravel()`` order."""
        return np.stack([g.ravel() for g in self.mesh()], axis=1)


def density_R_fft(market: MarketModel, t: float, counts=256, extent: float = 8.0) -> DensityGrid:
    """Density of ``R(t)`` by discrete Fourier inversion.

    The grid is centred on the exact mean and spans ``extent`` standard
    deviations each way. Frequencies use trapezoid weights (half weight at the
    unpaired Nyquist node). Negative lobes are clipped and the mass
    renormalised to one.

    Parameters
    ----------
    market : MarketModel
        Real-world or risk-neutral market.
    t : float
        Horizon in years.
    counts : int or sequence of int
        Grid size per axis; powers of two.
    extent : float
        Half-width of the grid in standard deviations.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    k = market.k
    counts = tuple(int(c) for c in np.broadcast_to(np.asarray(counts), (k,)))
    if any(c < 2 or c & (c - 1) for c in counts):
        raise ValidationError(f"counts must be powers of two, got {counts}")
    N = np.array(counts)
    mean = mean_R(market, t)
    sd = np.sqrt(np.diag(cov_R(market, t)))
    if np.any(sd <= 0):
        raise DomainError("degenerate coordinate: zero variance")
    y0 = mean - extent * sd
    dy = 2.0 * extent * sd / N
    dth = 2.0 * np.pi / (N * dy)
    th0 = -0.5 * N * dth

    idx = [np.arange(c) for c in counts]
    theta_axes = [th0[a] + idx[a] * dth[a] for a in range(k)]
    theta = np.stack(np.meshgrid(*theta_axes, indexing="ij"), axis=-1)
    phi = market.char_R(theta, t)

    edge = np.zeros(counts, dtype=bool)
    for a in range(k):
        sl = [slice(None)] * k
        sl[a] = 0
        edge[tuple(sl)] = True
    nyq = float(np.max(np.abs(phi[edge])))
    if nyq > 1e-8:
        warnings.warn(f"characteristic function modulus {nyq:.2e} at the grid edge; "
                      "the inverted density is aliased", AliasingWarning, stacklevel=2)

    g = phi.copy()
    for a in range(k):
        w = np.ones(counts[a])
        w[0] = 0.5
        factor = w * np.exp(-1j * idx[a] * dth[a] * y0[a])
        shape = [1] * k
        shape[a] = counts[a]
        g *= factor.reshape(shape)
    F = np.fft.fftn(g)
    for a in range(k):
        # exp(-i th0 * j * dy) = (-1)**j since th0 * dy = -pi * N / N
        post = np.exp(-1j * th0[a] * idx[a] * dy[a])
        shape = [1] * k
        shape[a] = counts[a]
        F *= post.reshape(shape)
    F *= np.exp(-1j * float(th0 @ y0))
    f = np.real(F) * float(np.prod(dth)) / (2.0 * np.pi) ** k

    cell = float(np.prod(dy))
    raw_mass = float(f.sum() * cell)
    negative = float(-f[f < 0].sum() * cell) + 0.0
    f = np.clip(f, 0.0, None)
    f /= f.sum() * cell
    return DensityGrid(origin=y0, spacing=dy, counts=counts, values=f, t=float(t),
                       raw_mass=raw_mass, clipped_mass=negative, nyquist_modulus=nyq)


@dataclass(frozen=True, eq=False)
class StructuredParams:
    """Parameters with ``M = (diag(m_11, ..., m_dd), M_{d+1})``, all entries positive."""

    params: VMGammaParams

    def __post_init__(self):
        p = self.params
        d, n = p.M.shape
        if n != d + 1:
            raise ValidationError(f"structured parameters need n = d + 1 columns, got n={n}, d={d}")
        diag = np.diag(p.M[:, :d])
        off = p.M[:, :d] - np.diag(diag)
        if np.any(off != 0) or np.any(diag <= 0) or np.any(p.M[:, d] <= 0):
            raise ValidationError("M must be a positive diagonal block followed by a positive column")

    @property
    def diag(self) -> np.ndarray:
        d = self.params.d
        return np.diag(self.params.M[:, :d]).copy()

    @property
    def common(self) -> np.ndarray:
        return self.params.M[:, -1].copy()


def structured(params) -> StructuredParams:
    if isinstance(params, StructuredParams):
        return params
    return StructuredParams(as_params(params))


def _log_c_star(b, diag, t):
    d = diag.size
    lc = t * b[d] * np.log(b[d]) - log_gamma_fn(t * b[d])
    for k in range(d):
        lc += t * b[k] * np.log(b[k]) - log_gamma_fn(t * b[k]) - t * b[k] * np.log(diag[k])
    return float(lc)


def _beta_star(b, diag, common):
    d = diag.size
    return float(-b[d] + np.sum(b[:d] * common / diag))


def _checked_quad(func, a, b, floor=1e-300, **kw):
    val, err, info = integrate.quad(func, a, b, full_output=1, **kw)[:3]
    tol = max(kw.get("epsabs", 1.49e-8), kw.get("epsrel", 1.49e-8) * abs(val))
    if err > 100 * tol and err > floor:
        raise ConvergenceError(f"quadrature did not converge: value {val:.6e}, error estimate {err:.2e}",
                               best=(val, err))
    return val


def density_T_quadrature(sparams, t: float, tau) -> float:
    """Density of the subordinator ``T(t)`` at ``tau``.

    One-dimensional integral over the value ``s`` of the common Gamma clock.
    Endpoint singularities ``s**(t b_{d+1} - 1)`` and
    ``(s_max - s)**(t b_k - 1)`` are absorbed into algebraic quadrature weights.
    """
    sp = structured(sparams)
    if not t > 0:
        raise DomainError("t must be positive")
    p = sp.params
    d = p.d
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (d,):
        raise DomainError(f"tau must have length {d}")
    if np.any(tau <= 0):
        return 0.0
    b, diag, common = p.b, sp.diag, sp.common
    ratios = tau / common
    s_max = float(ratios.min())
    tie = np.isclose(ratios, s_max, rtol=1e-14, atol=0.0)
    beta = _beta_star(b, diag, common)
    left = t * b[d] - 1.0
    right = float(np.sum(t * b[:d][tie] - 1.0))
    log_scale = float(np.sum((t * b[:d][tie] - 1.0) * np.log(common[tie])))
    free = np.flatnonzero(~tie)

    def integrand(s):
        val = beta * s + log_scale
        for k in free:
            val += (t * b[k] - 1.0) * np.log(tau[k] - common[k] * s)
        return np.exp(val)

    val = _checked_quad(integrand, 0.0, s_max, weight="alg", wvar=(left, right),
                        epsabs=0.0, epsrel=1e-10, limit=200)
    log_pref = _log_c_star(b, diag, t) - float(np.sum(b[:d] * tau / diag))
    return float(np.exp(log_pref) * val)


def density_Y_quadrature(sparams, t: float, y, mu=None, sigma=None, epsrel: float = 1e-8,
                         inner_rel: float = 1e-10) -> np.ndarray:
    """Density of ``Y(t)`` for structured parameters by nested quadrature.

    Conditioning on the common clock ``s`` and substituting
    ``tau_k = m_{k,d+1} s / u`` gives an outer integral over ``s`` of a product
    of one-dimensional integrals over ``u`` in ``(0, 1)``. The weight
    ``(1 - u)**(t b_k - 1)`` is removed by ``1 - u = w**(1/(t b_k))``.

    ``y`` is a single point of length ``d`` or an ``(P, d)`` array; the outer
    integral is vector-valued over all points. ``mu`` and ``sigma`` override
    the Brownian parameters carried by ``sparams``.
    """
    sp = structured(sparams)
    if mu is not None or sigma is not None:
        p0 = sp.params
        sp = StructuredParams(p0.replace(mu=p0.mu if mu is None else mu,
                                         sigma=p0.sigma if sigma is None else sigma))
    if not t > 0:
        raise DomainError("t must be positive")
    p = sp.params
    d = p.d
    if np.any(p.sigma <= 0):
        raise DomainError("the transition density requires a non-singular Sigma")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != d:
        raise DomainError(f"y must have trailing dimension {d}")
    b, diag, common, mu, sig = p.b, sp.diag, sp.common, p.mu, p.sigma
    shapes = t * b
    if np.any(shapes <= 1.0):
        warnings.warn("Gamma shape t*b <= 1: integrable endpoint singularity handled by substitution",
                      SingularityWarning, stacklevel=2)

    a = 1.0 / (2.0 * common * sig)
    a_hat = common * (b[:d] / diag + mu ** 2 / (2.0 * sig))
    beta = _beta_star(b, diag, common)
    power = float(t * b.sum() - (d + 2) / 2.0)
    log_ct = (_log_c_star(b, diag, t) - 0.5 * (d * np.log(2 * np.pi) + np.sum(np.log(sig)))
              + float(np.sum((shapes[:d] - 0.5) * np.log(common))))

    uniq, inverse = [], []
    for k in range(d):
        u_k, inv_k = np.unique(y[:, k] ** 2, return_inverse=True)
        uniq.append(u_k)
        inverse.append(inv_k)

    def inner(s, k):
        c = shapes[k]
        B = a_hat[k] * s
        out = np.empty(uniq[k].size)
        for j, y2 in enumerate(uniq[k]):
            A = a[k] * y2 / s

            def log_g(u):
                return -A * u - B / u - (c + 0.5) * np.log(u)

            def f_low(x):
                # u = exp(x) on (0, 1/2]
                u = np.exp(x)
                return np.exp(log_g(u) + x + (c - 1.0) * np.log1p(-u))

            def f_high(w):
                # 1 - u = w**(1/c) on [1/2, 1) absorbs the (1 - u)**(c - 1) factor
                u = -np.expm1(np.log(w) / c) if w > 0 else 1.0
                return np.exp(log_g(u)) / c if u > 0.0 else 0.0

            # the factor exp(-B/u) is below exp(-700) for u < B/700
            x_lo = min(np.log(B / 700.0), np.log(0.5) - 1.0)
            q = c + 0.5
            u_peak = 2.0 * B / (q + np.sqrt(q * q + 4.0 * A * B))
            pts = [np.log(u_peak)] if x_lo < np.log(u_peak) < np.log(0.5) else None
            # values below the floor are negligible against the other factors
            lo = _checked_quad(f_low, x_lo, np.log(0.5), floor=1e-150, points=pts, epsabs=1e-300,
                               epsrel=inner_rel, limit=200)
            hi = _checked_quad(f_high, 0.0, 0.5 ** c, floor=1e-150, epsabs=1e-300, epsrel=inner_rel,
                               limit=200)
            out[j] = lo + hi
        return out

    def outer(s):
        if s <= 0.0:
            return np.zeros(y.shape[0])
        acc = np.full(y.shape[0], beta * s + power * np.log(s))
        prod = np.ones(y.shape[0])
        for k in range(d):
            prod = prod * inner(s, k)[inverse[k]]
        return np.exp(acc) * prod

    val, err = integrate.quad_vec(outer, 0.0, np.inf, epsabs=0.0, epsrel=epsrel, limit=2000)
    if not np.all(np.isfinite(val)):
        raise ConvergenceError("non-finite transition density integral")
    out = np.exp(log_ct + y @ (mu / sig)) * val
    return float(out[0]) if single else out


def vg1_density(b: float, mu: float, sigma: float, t: float, y):
    """Univariate variance-Gamma density of ``Y(t)``.

    ``sigma`` is the Brownian variance. At ``y = 0`` the density is finite only
    for ``b t > 1/2``; otherwise ``inf`` is returned there.
    """
    if not (sigma > 0 and t > 0 and b > 0):
        raise DomainError("vg1_density requires positive b, sigma and t")
    y = np.asarray(y, dtype=float)
    bt = b * t
    c = 2.0 * b + mu * mu / sigma
    nu = bt - 0.5
    log_pref = (0.5 * np.log(2.0) + bt * np.log(b) - 0.5 * np.log(np.pi * sigma)
                - log_gamma_fn(bt))
    q = y * y / sigma
    out = np.empty_like(y)
    zero = q == 0
    if np.any(~zero):
        qz = q[~zero]
        x = np.sqrt(c * qz)
        out[~zero] = np.exp(log_pref + mu * y[~zero] / sigma + 0.5 * nu * (np.log(qz) - np.log(c))
                            + log_bessel_k(abs(nu), x))
    if np.any(zero):
        if nu > 0:
            # (q/c)^(nu/2) K_nu(sqrt(c q)) -> c^-nu 2^(nu-1) Gamma(nu)
            out[zero] = np.exp(log_pref - nu * np.log(c) + (nu - 1) * np.log(2.0) + log_gamma_fn(nu))
        else:
            out[zero] = np.inf
    return float(out) if out.ndim == 0 else out
