"""Independent reference computations shared by several test modules."""
import numpy as np
from scipy.special import exp1, ndtr, roots_legendre


def _log_nodes(lo=1e-9, hi=10.0, panels=60, order=64):
    x, w = roots_legendre(order)
    edges = np.linspace(np.log(lo), np.log(hi), panels + 1)
    u = np.concatenate([(b - a) / 2 * x + (a + b) / 2 for a, b in zip(edges[:-1], edges[1:])])
    wu = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    return np.exp(u), wu


def component_box_mass(params, l, lo, hi):
    """Levy mass of column ``l`` in the box ``[lo, hi]`` from the Gamma mixture.

    The Levy measure of the factor is ``b_l int P(N(mu m r, Sigma m r) in .) e^{-b_l r} dr / r``
    (jumps of the clock of size ``r``). Coordinates outside the support must
    have a box containing 0. Integrates in ``log r`` with Gauss-Legendre.
    """
    b = params.b[l]
    col = params.M[:, l]
    r, w = _log_nodes()
    prob = np.ones_like(r)
    for k in range(params.d):
        if col[k] == 0:
            if not lo[k] < 0 < hi[k]:
                return 0.0
            continue
        m = params.mu[k] * col[k] * r
        s = np.sqrt(params.sigma[k] * col[k] * r)
        prob = prob * (ndtr((hi[k] - m) / s) - ndtr((lo[k] - m) / s))
    return float(np.sum(w * b * np.exp(-b * r) * prob))


def vg_line_mass(b, mu, sigma, lo, hi):
    """Levy mass of a univariate VG on ``[lo, hi]`` (one sign) via exponential integrals.

    The density is ``(b/|y|) exp(-c |y|)`` with ``c = (sqrt(2 b sigma + mu^2) - sign(y) mu) / sigma``.
    """
    sign = np.sign(lo + hi)
    c = (np.sqrt(2 * b * sigma + mu * mu) - sign * mu) / sigma
    a1, a2 = sorted((abs(lo), abs(hi)))
    return float(b * (exp1(c * a1) - exp1(c * a2)))
