"""Cumulant and characteristic exponents, market moments and the Esscher machinery."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, ValidationError
from .process import ThorinAtoms, VMGammaParams, _as_vector, as_params

__all__ = [
    "MarketModel",
    "EsscherSolution",
    "laplace_exponent",
    "laplace_exponent_from_atoms",
    "domain_contains",
    "char_exponent",
    "kappa_of",
    "mean_R",
    "cov_R",
    "moment_summary",
    "esscher_transform",
    "solve_esscher",
    "risk_neutral_market",
    "correlation_sqrt",
]

logger = logging.getLogger(__name__)


def _atom_factors(params: VMGammaParams, lam) -> np.ndarray:
    """``b_l - <mu⋄M_l, lam> - |lam|^2_{Sigma⋄M_l}/2`` with shape ``(..., n)``."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1:] != (params.d,):
        raise DomainError(f"lambda must have trailing dimension {params.d}, got shape {lam.shape}")
    return params.b - lam @ params.column_drift - 0.5 * (lam ** 2) @ params.column_var


def domain_contains(params, lam) -> bool:
    """True iff ``E exp<lam, Y(1)>`` is finite."""
    params = as_params(params)
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)):
        return False
    return bool(np.all(_atom_factors(params, lam) > 0))


def laplace_exponent(params, lam):
    """Cumulant ``Lambda(lam) = log E exp<lam, Y(1)>``.

    ``lam`` may be a single vector or an array with trailing dimension ``d``.

    Raises
    ------
    DomainError
        If any atom factor is non-positive.
    """
    params = as_params(params)
    f = _atom_factors(params, lam)
    if np.any(f <= 0):
        raise DomainError(f"lambda={np.asarray(lam).tolist()} lies outside the exponential-moment domain")
    out = -np.sum(params.b * np.log(f / params.b), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def laplace_exponent_from_atoms(atoms: ThorinAtoms, mu, sigma, lam) -> float:
    """Cumulant evaluated as an integral against the Thorin atoms.

    Independent of ``(b, M)``: each atom ``x`` contributes
    ``-w log((|x|^2 - <mu⋄x, lam> - |lam|^2_{Sigma⋄x}/2) / |x|^2)``.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    total = 0.0
    for w, x in zip(atoms.weights, atoms.locations):
        nx2 = float(x @ x)
        arg = nx2 - (mu * x) @ lam - 0.5 * (sigma * x) @ (lam ** 2)
        if arg <= 0:
            raise DomainError("lambda outside the exponential-moment domain")
        total -= w * np.log(arg / nx2)
    return float(total)


def char_exponent(params, theta):
    """Characteristic exponent ``psi`` with ``E exp(i<theta, Y(t)>) = exp(t psi(theta))``.

    Computed as a sum of per-atom principal logarithms; every argument has
    positive real part so no branch tracking is needed.
    """
    params = as_params(params)
    theta = np.asarray(theta, dtype=float)
    z = params.b + 0.5 * (theta ** 2) @ params.column_var - 1j * (theta @ params.column_drift)
    out = -np.sum(params.b * np.log(z / params.b), axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def kappa_of(params, A) -> np.ndarray:
    """Compensator ``kappa_i = -Lambda(A^i)`` for every row of ``A``."""
    params = as_params(params)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    f = _atom_factors(params, A)
    bad = np.flatnonzero(np.any(f <= 0, axis=-1))
    if bad.size:
        raise DomainError(f"row {int(bad[0])} of A lies outside the exponential-moment domain of Y")
    return np.sum(params.b * np.log(f / params.b), axis=-1)


def correlation_sqrt(rho) -> np.ndarray:
    """Symmetric principal square root of ``[[1, rho], [rho, 1]]``."""
    C = np.array([[1.0, rho], [rho, 1.0]])
    w, V = np.linalg.eigh(C)
    if np.any(w < 0):
        raise ValidationError(f"rho={rho} does not give a positive semidefinite correlation matrix")
    return (V * np.sqrt(w)) @ V.T


@dataclass(frozen=True, eq=False)
class MarketModel:
    """Log-price model ``R(t) = (m - q + kappa) t + A Y(t)``, ``S_i = S0_i exp(R_i)``.

    ``kappa`` is derived from ``params`` and ``A`` at construction and cannot be
    supplied.
    """

    params: VMGammaParams
    A: np.ndarray
    m: np.ndarray
    q: np.ndarray
    r: float
    S0: np.ndarray
    kappa: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[1] != self.params.d:
            raise ValidationError(f"A: expected {self.params.d} columns, got shape {A.shape}")
        k = A.shape[0]
        m = _as_vector(self.m, k, "m")
        q = _as_vector(self.q, k, "q")
        S0 = _as_vector(self.S0, k, "S0")
        if np.any(S0 <= 0):
            raise ValidationError("S0: spot prices must be positive")
        if not np.isfinite(self.r):
            raise ValidationError("r: must be finite")
        for name, arr in (("A", A), ("m", m), ("q", q)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        S0.setflags(write=False)
        object.__setattr__(self, "S0", S0)
        object.__setattr__(self, "r", float(self.r))
        kappa = kappa_of(self.params, A)
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)

    @property
    def k(self) -> int:
        return self.A.shape[0]

    @property
    def drift(self) -> np.ndarray:
        """Deterministic drift rate ``m - q + kappa``."""
        return self.m - self.q + self.kappa

    def replace(self, **changes) -> "MarketModel":
        fields = dict(params=self.params, A=self.A, m=self.m, q=self.q, r=self.r, S0=self.S0)
        fields.update(changes)
        return MarketModel(**fields)

    def cumulant_R(self, u) -> float:
        """``Lambda_{AY(1)}(u) = Lambda_Y(A'u)``."""
        return laplace_exponent(self.params, np.asarray(u, dtype=float) @ self.A)

    def char_R(self, theta, t):
        """Characteristic function of ``R(t)``; ``theta`` has trailing dimension ``k``."""
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * t * (theta @ self.drift) + t * char_exponent(self.params, theta @ self.A))


def mean_R(market: MarketModel, t: float) -> np.ndarray:
    p = market.params
    return (market.drift + market.A @ p.column_drift.sum(axis=1)) * t


def _factor_cov(params: VMGammaParams) -> np.ndarray:
    cd = params.column_drift
    return (cd / params.b) @ cd.T + np.diag(params.column_var.sum(axis=1))


def cov_R(market: MarketModel, t: float) -> np.ndarray:
    C = market.A @ _factor_cov(market.params) @ market.A.T * t
    return 0.5 * (C + C.T)


def moment_summary(market: MarketModel, t: float = 1.0):
    """Means, volatilities and correlation matrix of ``R(t)``."""
    mean = mean_R(market, t)
    C = cov_R(market, t)
    vol = np.sqrt(np.diag(C))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = C / np.outer(vol, vol)
    return mean, vol, corr


def esscher_transform(params, lam) -> VMGammaParams:
    """Parameters of ``Y`` under the Esscher measure with parameter ``lam``.

    ``b`` and ``sigma`` are unchanged, ``mu`` becomes ``mu + Sigma lam`` and each
    column ``M_l`` is scaled by ``b_l / factor_l``.
    """
    params = as_params(params)
    lam = np.asarray(lam, dtype=float)
    f = _atom_factors(params, lam)
    if np.any(f <= 0):
        raise DomainError(f"lambda={lam.tolist()} lies outside the exponential-moment domain")
    return params.replace(M=params.M * (params.b / f), mu=params.mu + params.sigma * lam)


@dataclass(frozen=True)
class EsscherSolution:
    h: np.ndarray
    residual: float
    iterations: int


def _in_domain_R(market, h, margin):
    pts = np.vstack([h, h + np.eye(market.k)]) @ market.A
    return bool(np.all(_atom_factors(market.params, pts) > margin))


def _esscher_residual(market, h):
    lam = np.vstack([np.eye(market.k), h[None, :], np.eye(market.k) + h]) @ market.A
    L = laplace_exponent(market.params, lam)
    k = market.k
    return market.m - market.r - (L[:k] + L[k] - L[k + 1:])


def solve_esscher(market: MarketModel, tol: float = 1e-10, max_iter: int = 200,
                  fd_step: float = 1e-6) -> EsscherSolution:
    """Find ``h*`` making discounted, dividend-adjusted prices martingales.

    Damped Newton iteration from ``h = 0`` with a forward-difference Jacobian;
    each step is halved until the iterate and every ``e_i + h`` remain
    strictly inside the domain and the residual norm does not grow.
    """
    margin = 1e-12
    k = market.k
    h = np.zeros(k)
    if not _in_domain_R(market, h, margin):
        raise DomainError("the rows of A lie outside the exponential-moment domain; no feasible start")
    F = _esscher_residual(market, h)
    res = float(np.max(np.abs(F)))
    it = 0
    polish = True
    while res > tol or (polish and res > 0):
        if res <= tol:
            # one extra Newton step once inside tolerance; kept only if it helps
            polish = False
        if it >= max_iter:
            raise ConvergenceError(f"Esscher solve did not converge in {max_iter} iterations "
                                   f"(best residual {res:.3e})", best=h.copy())
        it += 1
        J = np.empty((k, k))
        for j in range(k):
            hj = h.copy()
            step = fd_step * max(1.0, abs(h[j]))
            hj[j] += step
            if not _in_domain_R(market, hj, margin):
                hj[j] -= 2 * step
                step = -step
            J[:, j] = (_esscher_residual(market, hj) - F) / step
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian at h={h.tolist()}", best=h.copy()) from exc
        t = 1.0
        while True:
            cand = h + t * delta
            if _in_domain_R(market, cand, margin):
                Fc = _esscher_residual(market, cand)
                rc = float(np.max(np.abs(Fc)))
                if rc < res or rc <= tol:
                    break
            t *= 0.5
            if t < 1e-12 and res <= tol:
                cand, Fc, rc = h, F, res
                break
            if t < 1e-12:
                raise ConvergenceError(f"line search stalled at residual {res:.3e}", best=h.copy())
        h, F, res = cand, Fc, rc
        logger.debug("esscher iter %d step %.3g residual %.3e", it, t, res)
    return EsscherSolution(h=h, residual=res, iterations=it)


def risk_neutral_market(market: MarketModel, solution: EsscherSolution = None):
    """Market under the Esscher martingale measure.

    ``Y`` takes the transformed parameters for ``lambda = A'h*``. The expected
    total return rate becomes ``r``; with the compensator recomputed under the
    new parameters the deterministic drift ``r - q + kappa_Q`` coincides with
    the original ``m - q + kappa_P`` (this is the martingale condition).

    Returns ``(q_market, solution)``.
    """
    if solution is None:
        solution = solve_esscher(market)
    q_params = esscher_transform(market.params, solution.h @ market.A)
    q_market = market.replace(params=q_params, m=np.full(market.k, market.r))
    return q_market, solution
