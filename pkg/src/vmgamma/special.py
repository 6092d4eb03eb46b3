"""Special functions used by the density and Lévy-measure formulas.

``bessel_k`` evaluates the modified Bessel function of the second kind for
real non-negative order. Half-integer orders use the terminating closed
form; all other orders delegate to the AMOS routines behind
:func:`scipy.special.kve`, which switch between the small-argument series
and the large-argument continued fraction internally.
"""
import math

import numpy as np
from scipy import special as sps

from .errors import DomainError

__all__ = ["bessel_k", "bessel_ke", "log_bessel_k", "k_hat", "log_gamma_fn"]

MAX_ORDER = 10.0


def _check(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(x))):
        raise DomainError("bessel_k requires finite order and argument")
    if np.any(nu < 0):
        raise DomainError("bessel_k order must be non-negative (K is even in its order)")
    if np.any(x <= 0):
        raise DomainError("bessel_k argument must be positive")
    return nu, x


def _half_integer_ke(n, x):
    # exp(x) * K_{n+1/2}(x) as a terminating sum
    total = np.zeros_like(x)
    for k in range(n + 1):
        coef = math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k))
        total = total + coef / (2.0 * x) ** k
    return np.sqrt(np.pi / (2.0 * x)) * total


def bessel_ke(nu, x):
    """Exponentially scaled ``exp(x) * K_nu(x)``; broadcasts over arrays."""
    nu, x = _check(nu, x)
    twice = 2.0 * nu
    if nu.ndim == 0 and twice == np.round(twice) and int(twice) % 2 == 1:
        out = _half_integer_ke(int(twice) // 2, x)
    else:
        out = sps.kve(nu, x)
    return out[()] if np.ndim(out) == 0 else out


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)``.

    Parameters
    ----------
    nu : float
        Order, ``0 <= nu``. Orders above 10 are outside the validated range.
    x : float or ndarray
        Positive argument.

    Raises
    ------
    DomainError
        For non-positive or non-finite arguments, negative order, or (scalar
        calls only) when the result underflows to zero.
    """
    ke = bessel_ke(nu, x)
    x = np.asarray(x, dtype=float)
    out = ke * np.exp(-x)
    if np.ndim(out) == 0:
        out = float(out)
        if out == 0.0:
            raise DomainError(f"K_{float(nu)}({float(x)}) underflows; use log_bessel_k")
    return out


def log_bessel_k(nu, x):
    """``log K_nu(x)``, finite well past the underflow point of ``bessel_k``."""
    x = np.asarray(x, dtype=float)
    out = np.log(bessel_ke(nu, x)) - x
    return out[()] if np.ndim(out) == 0 else out


def k_hat(nu, r):
    """Scaled Bessel function ``r**nu * K_nu(r)``.

    Bounded near the origin with limit ``2**(nu-1) * Gamma(nu)``.
    """
    nu_a = np.asarray(nu, dtype=float)
    r_a = np.asarray(r, dtype=float)
    if np.any(nu_a <= 0):
        raise DomainError("k_hat requires a positive order")
    logs = nu_a * np.log(r_a) + log_bessel_k(nu_a, r_a)
    out = np.exp(logs)
    return float(out) if np.ndim(out) == 0 else out


def log_gamma_fn(x):
    """``log Gamma(x)`` for positive ``x``."""
    x_a = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x_a)) or np.any(x_a <= 0):
        raise DomainError("log_gamma_fn requires a positive finite argument")
    out = sps.gammaln(x_a)
    return float(out) if np.ndim(out) == 0 else out
