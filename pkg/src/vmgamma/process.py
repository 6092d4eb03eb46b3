"""Parameter containers and constructors for the variance multivariate-Gamma family.

A process ``Y`` in this family is a ``d``-dimensional Brownian motion with
drift ``mu`` and diagonal covariance ``diag(sigma)``, time-changed coordinate
by coordinate by the subordinator ``T = sum_l G_l M_l``, where the ``G_l`` are
independent standard Gamma processes with shape = rate = ``b_l`` and ``M_l``
are the non-negative, non-zero columns of ``M``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "VMGammaParams",
    "ThorinAtoms",
    "GammaMarginalReport",
    "new_vmgamma",
    "from_vg",
    "from_semeraro",
    "from_guillaume",
    "thorin_atoms",
    "from_thorin_atoms",
    "has_gamma_marginal",
    "is_gamma_d_subordinator",
    "gamma_d_polar_pair",
]

_RTOL = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VMGammaParams:
    """Immutable parameter set ``(b, M, mu, sigma)``.

    ``sigma`` holds the diagonal of the Brownian covariance (variances, not
    volatilities). Arrays are copied and made read-only on construction.
    """

    b: np.ndarray
    M: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        M = np.asarray(self.M, dtype=float)
        if M.ndim == 1:
            M = M.reshape(-1, 1) if b.size == 1 else M.reshape(1, -1)
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 2:
            if np.any(np.abs(sigma - np.diag(np.diag(sigma))) > 0):
                raise ValidationError("sigma: off-diagonal covariance is not allowed; "
                                      "express dependence through the columns of M or the loading matrix A")
            sigma = np.diag(sigma)
        sigma = np.atleast_1d(sigma)
        _validate(b, M, mu, sigma)
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "M", _frozen(M))
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "sigma", _frozen(sigma))

    @property
    def d(self) -> int:
        return self.M.shape[0]

    @property
    def n(self) -> int:
        return self.M.shape[1]

    @property
    def column_drift(self) -> np.ndarray:
        """``mu ⋄ M_l`` stacked as a ``(d, n)`` array."""
        return self.mu[:, None] * self.M

    @property
    def column_var(self) -> np.ndarray:
        """Diagonals of ``Sigma ⋄ M_l`` stacked as a ``(d, n)`` array."""
        return self.sigma[:, None] * self.M

    def replace(self, **changes) -> "VMGammaParams":
        fields = dict(b=self.b, M=self.M, mu=self.mu, sigma=self.sigma)
        fields.update(changes)
        return VMGammaParams(**fields)

    def allclose(self, other: "VMGammaParams", rtol=1e-12, atol=1e-14) -> bool:
        return (self.M.shape == other.M.shape
                and all(np.allclose(getattr(self, f), getattr(other, f), rtol=rtol, atol=atol)
                        for f in ("b", "M", "mu", "sigma")))

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "b": self.b.tolist(), "M": self.M.tolist(),
                "mu": self.mu.tolist(), "sigma": self.sigma.tolist()}


def _validate(b, M, mu, sigma):
    if M.ndim != 2:
        raise ValidationError("M: must be a d x n matrix")
    d, n = M.shape
    if b.shape != (n,):
        raise ValidationError(f"b: expected length {n} (number of columns of M), got {b.shape}")
    if mu.shape != (d,):
        raise ValidationError(f"mu: expected length {d}, got {mu.shape}")
    if sigma.shape != (d,):
        raise ValidationError(f"sigma: expected length {d}, got {sigma.shape}")
    for name, arr in (("b", b), ("M", M), ("mu", mu), ("sigma", sigma)):
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name}: entries must be finite")
    if np.any(b <= 0):
        raise ValidationError(f"b: Gamma shape parameters must be positive, got {b.tolist()}")
    if np.any(M < 0):
        raise ValidationError("M: entries must be non-negative")
    zero = np.flatnonzero(~np.any(M > 0, axis=0))
    if zero.size:
        raise ValidationError(f"M: column {int(zero[0])} is zero; columns must lie in [0,inf)^d minus the origin")
    if np.any(sigma < 0):
        raise ValidationError("sigma: diagonal covariance entries must be non-negative")


def new_vmgamma(d: int, n: int, b, M, mu, sigma) -> VMGammaParams:
    """Validated constructor checking the declared dimensions ``d`` and ``n``."""
    params = VMGammaParams(b=b, M=M, mu=mu, sigma=sigma)
    if params.d != d or params.n != n:
        raise ValidationError(f"M: expected shape ({d}, {n}), got {params.M.shape}")
    return params


def from_vg(d: int, b: float, mu, sigma) -> VMGammaParams:
    """Classical VG with one common Gamma clock (``n = 1``, ``M_1 = 1``)."""
    if not b > 0:
        raise ValidationError("b: must be positive")
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (d,))
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim < 2:
        sigma = np.broadcast_to(sigma, (d,))
    return new_vmgamma(d, 1, [b], np.ones((d, 1)), mu, sigma)


def from_semeraro(a: float, bparam: float, alpha, mu=None, sigma=None) -> VMGammaParams:
    """The alpha-subordinator ``T_k = S_k + alpha_k S_{d+1}``.

    Requires ``bparam > a * alpha_k`` for every ``k``. ``mu`` defaults to zero
    and ``sigma`` to ones.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a <= 0 or bparam <= 0 or np.any(alpha <= 0):
        raise ValidationError("a, b and alpha must be positive")
    if np.any(bparam <= a * alpha):
        raise ValidationError("b: must exceed a*alpha_k for every k")
    d = alpha.size
    b_star = np.append(bparam / alpha - a, a)
    M = np.hstack([np.diag(bparam - a * alpha), (a * alpha)[:, None]]) / bparam
    mu = np.zeros(d) if mu is None else mu
    sigma = np.ones(d) if sigma is None else sigma
    return new_vmgamma(d, d + 1, b_star, M, mu, sigma)


def from_guillaume(alpha, a, beta, c1: float, c2: float, mu=None, sigma=None) -> VMGammaParams:
    """Two-level clock with free factor laws: ``S_k ~ Gamma(a_k, beta_k)``, ``S_{d+1} ~ Gamma(c1, c2)``."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if not (alpha.shape == a.shape == beta.shape):
        raise ValidationError("alpha, a and beta must have the same length")
    if np.any(alpha <= 0) or np.any(a <= 0) or np.any(beta <= 0) or c1 <= 0 or c2 <= 0:
        raise ValidationError("alpha, a, beta, c1 and c2 must be positive")
    d = alpha.size
    b_star = np.append(a, c1)
    M = np.hstack([np.diag(a / beta), (c1 / c2 * alpha)[:, None]])
    mu = np.zeros(d) if mu is None else mu
    sigma = np.ones(d) if sigma is None else sigma
    return new_vmgamma(d, d + 1, b_star, M, mu, sigma)


@dataclass(frozen=True, eq=False)
class ThorinAtoms:
    """Finitely supported Thorin measure ``sum_l w_l delta_{x_l}``."""

    weights: np.ndarray     # (n,)
    locations: np.ndarray   # (n, d)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return self.weights.size


def thorin_atoms(params: VMGammaParams) -> ThorinAtoms:
    """Atoms ``b_l`` at ``b_l M_l / |M_l|^2`` (Euclidean norm)."""
    norms2 = np.sum(params.M ** 2, axis=0)
    locs = (params.b / norms2)[None, :] * params.M
    return ThorinAtoms(weights=_frozen(params.b), locations=_frozen(locs.T))


def from_thorin_atoms(atoms: ThorinAtoms, mu, sigma) -> VMGammaParams:
    """Inverse of :func:`thorin_atoms`: ``M_l = w_l x_l / |x_l|^2``."""
    x = np.asarray(atoms.locations, dtype=float)
    w = np.asarray(atoms.weights, dtype=float)
    M = (x * (w / np.sum(x ** 2, axis=1))[:, None]).T
    return VMGammaParams(b=w, M=M, mu=mu, sigma=sigma)


@dataclass(frozen=True)
class GammaMarginalReport:
    is_gamma: bool
    shape: Optional[float] = None
    rate: Optional[float] = None


def has_gamma_marginal(params: VMGammaParams, k: int) -> GammaMarginalReport:
    """Test whether ``T_k`` is Gamma distributed; ``k`` is 1-based.

    ``T_k = sum_l m_kl G_l`` is Gamma exactly when every non-zero ``m_kl G_l``
    has the same rate ``b_l / m_kl``.
    """
    if not 1 <= k <= params.d:
        raise DomainError(f"component index k={k} outside 1..{params.d}")
    row = params.M[k - 1]
    support = np.flatnonzero(row > 0)
    rates = params.b[support] / row[support]
    l0 = support[0]
    # b_l m_{k,l0} = b_{l0} m_{k,l} for all l in the support
    lhs = params.b[support] * row[l0]
    rhs = params.b[l0] * row[support]
    if np.allclose(lhs, rhs, rtol=_RTOL, atol=0.0):
        return GammaMarginalReport(True, float(params.b[support].sum()), float(rates[0]))
    return GammaMarginalReport(False)


def _parallel_pairs(M):
    norms = np.linalg.norm(M, axis=0)
    n = M.shape[1]
    for k in range(n):
        for l in range(n):
            if np.allclose(norms[l] * M[:, k], norms[k] * M[:, l], rtol=_RTOL, atol=1e-15):
                yield k, l, norms


def is_gamma_d_subordinator(params: VMGammaParams) -> bool:
    """Membership of the subordinator in the Perez-Abreu/Stelzer Gamma class.

    Parallel columns must carry weights proportional to their norms.
    """
    for k, l, norms in _parallel_pairs(params.M):
        if not np.isclose(norms[l] * params.b[k], norms[k] * params.b[l], rtol=_RTOL, atol=0.0):
            return False
    return True


def gamma_d_polar_pair(params: VMGammaParams):
    """Canonical polar pair of a Gamma-class subordinator, or ``None``.

    Returns ``(directions, weights, rates)``: the measure ``alpha`` puts weight
    ``b_l`` on the unit direction ``M_l/|M_l|`` and ``beta`` takes value
    ``b_l/|M_l|`` there. Parallel columns are merged.
    """
    if not is_gamma_d_subordinator(params):
        return None
    norms = np.linalg.norm(params.M, axis=0)
    dirs, weights, rates = [], [], []
    for l in range(params.n):
        u = params.M[:, l] / norms[l]
        for i, v in enumerate(dirs):
            if np.allclose(u, v, rtol=_RTOL, atol=1e-15):
                weights[i] += params.b[l]
                break
        else:
            dirs.append(u)
            weights.append(float(params.b[l]))
            rates.append(float(params.b[l] / norms[l]))
    return np.array(dirs), np.array(weights), np.array(rates)


def as_params(obj) -> VMGammaParams:
    """Accept either parameters or anything carrying a ``params`` attribute."""
    if isinstance(obj, VMGammaParams):
        return obj
    params = getattr(obj, "params", None)
    if isinstance(params, VMGammaParams):
        return params
    raise TypeError(f"expected VMGammaParams or a market model, got {type(obj).__name__}")


def _as_vector(x, size: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (size,):
        raise ValidationError(f"{name}: expected length {size}, got {arr.shape}")
    return arr

