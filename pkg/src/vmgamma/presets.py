"""Reference parameter set used throughout the examples and tests.

Two risk factors, three Gamma clocks (one per factor plus a common one),
loaded onto two assets through ``A = [[1, rho], [rho, 1]]**0.5``.
"""
import numpy as np

from .process import VMGammaParams
from .transforms import MarketModel, correlation_sqrt

BASELINE = {
    "b": [5.0, 5.0, 10.0],
    "M": [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5]],
    "mu": [-0.14, -0.25],
    "sigma": [0.0144, 0.04],
    "m": [0.1, 0.1],
    "q": [0.0, 0.0],
    "S0": [100.0, 100.0],
}

# spot is not printed alongside the reference prices; 100 is the only value
# consistent with immediate-exercise prices K - 100 for deep in-the-money puts
DEFAULT_SPOT = 100.0


def baseline_params() -> VMGammaParams:
    return VMGammaParams(b=BASELINE["b"], M=BASELINE["M"], mu=BASELINE["mu"], sigma=BASELINE["sigma"])


def baseline_market(rho: float = 0.0, r: float = 0.10, S0=(DEFAULT_SPOT, DEFAULT_SPOT)) -> MarketModel:
    return MarketModel(params=baseline_params(), A=correlation_sqrt(rho),
                       m=np.array(BASELINE["m"]), q=np.array(BASELINE["q"]), r=r, S0=np.asarray(S0, float))


def baseline_config(rho: float = 0.0, r: float = 0.10) -> dict:
    """Baseline market as a CLI configuration document."""
    return {
        "schema": 1,
        "d": 2, "k": 2, "n": 3,
        "b": BASELINE["b"], "M": BASELINE["M"], "mu": BASELINE["mu"], "sigma": BASELINE["sigma"],
        "rho": rho,
        "m": BASELINE["m"], "q": BASELINE["q"], "r": r, "S0": BASELINE["S0"],
    }
