"""Monte Carlo oracle for European prices by exact terminal sampling."""
import numpy as np

from ..errors import ValidationError
from ..simulation import _chunks, _sample_Y_chunk
from ..transforms import MarketModel
from .options import OptionSpec, PriceResult, payoff

__all__ = ["price_monte_carlo"]


def price_monte_carlo(q_market: MarketModel, option: OptionSpec, n_paths: int = 1_000_000,
                      seed=0) -> PriceResult:
    """Discounted sample mean of the payoff with its standard error.

    Paths are processed in chunks seeded from ``seed``; the result is
    deterministic for a given seed and path count.
    """
    if option.is_american:
        raise ValidationError("style: Monte Carlo pricing supports European options only")
    n_paths = int(n_paths)
    if n_paths < 1:
        raise ValidationError("n_paths: must be at least 1")
    T = option.maturity
    total = 0.0
    total_sq = 0.0
    for n, rng in _chunks(n_paths, seed):
        Y = _sample_Y_chunk(q_market.params, T, n, rng)
        S = q_market.S0 * np.exp(q_market.drift * T + Y @ q_market.A.T)
        x = payoff(option, S)
        total += float(np.sum(x))
        total_sq += float(np.sum(x * x))
    disc = np.exp(-q_market.r * T)
    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0) * n_paths / max(n_paths - 1, 1)
    se = disc * np.sqrt(var / n_paths) if n_paths > 1 else float("nan")
    return PriceResult(price=float(disc * mean), method="monte_carlo", std_error=float(se),
                       diagnostics={"paths": n_paths})
