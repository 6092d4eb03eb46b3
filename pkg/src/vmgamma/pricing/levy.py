"""Per-factor Levy densities of the factor process Y."""
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..errors import DomainError
from ..process import as_params
from ..special import log_bessel_k

__all__ = ["LevyComponent", "levy_components"]


@dataclass(frozen=True, eq=False)
class LevyComponent:
    """Jumps generated by the Gamma factor attached to column ``index`` of ``M``.

    The component lives on the coordinates ``support`` (where the column is
    positive) and has a Bessel-K density there with respect to Lebesgue
    measure on those coordinates.
    """

    index: int
    support: tuple
    alpha: float
    beta: float
    dim: int
    scale: np.ndarray  # Sigma_kk * m_kl over the support
    tilt: np.ndarray  # mu_k / Sigma_kk over the support

    def log_density(self, y) -> np.ndarray:
        """Log density at points ``y`` with trailing dimension ``dim`` (support coordinates)."""
        y = np.asarray(y, dtype=float)
        q = np.sum(y * y / self.scale, axis=-1)
        with np.errstate(divide="ignore"):
            lq = np.log(q)
        x = np.sqrt(self.beta * q)
        out = np.full(q.shape, np.inf)
        pos = q > 0
        if np.any(pos):
            out[pos] = (np.log(self.alpha) + log_bessel_k(0.5 * self.dim, x[pos])
                        - 0.25 * self.dim * lq[pos] + (y @ self.tilt)[pos])
        return out

    def density(self, y) -> np.ndarray:
        out = np.exp(self.log_density(y))
        return float(out) if np.ndim(out) == 0 else out

    def radial_density(self, r) -> np.ndarray:
        """Density of the jump size in the metric ``q``: mass of ``{sqrt(q) in dr}``, for ``mu = 0``.

        Used for integrability checks; ``Pi(sqrt(q) > eps)`` is finite for
        every ``eps > 0``.
        """
        r = np.asarray(r, dtype=float)
        d = self.dim
        # surface of the unit sphere times the Jacobian of the ellipsoidal scaling
        surf = 2.0 * np.pi ** (0.5 * d) / np.exp(gammaln(0.5 * d)) * np.sqrt(np.prod(self.scale))
        return surf * r ** (d - 1) * self.alpha * np.exp(log_bessel_k(0.5 * d, np.sqrt(self.beta) * r)) \
            / r ** (0.5 * d)


def levy_components(params) -> list:
    """Decompose the Levy measure of ``Y`` into one component per column of ``M``.

    Component ``l`` has ``beta_l = 2 b_l + <mu⋄M_l, Sigma^{-1} mu>`` and

        alpha_l * K_{d_l/2}(sqrt(beta_l q)) / q^{d_l/4} * exp(<mu, y>_{Sigma^{-1}}),
        q = sum_k y_k^2 / (Sigma_kk m_kl),

    over its support, with
    ``alpha_l = 2^{(2-d_l)/2} pi^{-d_l/2} b_l beta_l^{d_l/4} / prod sqrt(Sigma_kk m_kl)``.
    """
    params = as_params(params)
    if np.any(params.sigma <= 0):
        raise DomainError("Levy densities require all Sigma_kk > 0")
    out = []
    for l in range(params.n):
        col = params.M[:, l]
        J = tuple(int(k) for k in np.flatnonzero(col > 0))
        dl = len(J)
        scale = params.sigma[list(J)] * col[list(J)]
        mu = params.mu[list(J)]
        beta = 2.0 * params.b[l] + float(np.sum(col[list(J)] * mu * mu / params.sigma[list(J)]))
        alpha = (2.0 ** ((2 - dl) / 2) * np.pi ** (-dl / 2) * params.b[l] * beta ** (dl / 4)
                 / np.sqrt(np.prod(scale)))
        tilt = mu / params.sigma[list(J)]
        scale.setflags(write=False)
        tilt.setflags(write=False)
        out.append(LevyComponent(index=l, support=J, alpha=float(alpha), beta=float(beta), dim=dl,
                                 scale=scale, tilt=tilt))
    return out
