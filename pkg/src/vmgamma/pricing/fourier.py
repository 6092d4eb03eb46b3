"""European prices by integrating the payoff against the inverted density."""
import numpy as np

from ..density import density_R_fft
from ..errors import DomainError, ValidationError
from ..transforms import MarketModel
from .options import OptionSpec, PriceResult, payoff

__all__ = ["price_european_fourier"]


def price_european_fourier(q_market: MarketModel, option: OptionSpec, counts=1024,
                           extent: float = 12.0) -> PriceResult:
    """Discounted expected payoff under the density of ``R(T)`` on a Fourier grid.

    Raises
    ------
    DomainError
        If the inverted density mass differs from one by more than 1e-2.
    """
    if option.is_american:
        raise ValidationError("style: Fourier pricing supports European options only")
    grid = density_R_fft(q_market, option.maturity, counts=counts, extent=extent)
    if abs(grid.raw_mass - 1.0) > 1e-2:
        raise DomainError(f"inverted density mass {grid.raw_mass:.6f} is off by more than 1e-2")
    y = grid.points()
    S = q_market.S0 * np.exp(y)
    value = np.sum(payoff(option, S) * grid.values.ravel()) * grid.cell_volume
    price = float(np.exp(-q_market.r * option.maturity) * value)
    diag = {"grid_mass": grid.raw_mass, "clipped_mass": grid.clipped_mass, "counts": grid.counts}
    return PriceResult(price=price, method="fourier", diagnostics=diag)
