import numpy as np
import pytest

import vmgamma.pricing.fourier as fourier_mod
from vmgamma.errors import DomainError, ValidationError
from vmgamma.pricing import OptionSpec, PriceResult, payoff, price_european_fourier, price_monte_carlo

from reference_values import PRICES, RHOS, STRIKES

T = 0.25


def test_payoff_examples():
    best = lambda K: OptionSpec("best_of_put", "european", K, T)
    worst = lambda K: OptionSpec("worst_of_put", "european", K, T)
    assert payoff(best(100), [95, 105]) == 0
    assert payoff(worst(100), [95, 105]) == 5
    assert payoff(best(105), [100, 100]) == 5


def test_payoff_vectorised():
    S = np.array([[95.0, 105.0], [80.0, 90.0], [120.0, 130.0]])
    assert np.allclose(payoff(OptionSpec("worst_of", "european", 100, T), S), [5, 20, 0])


@pytest.mark.parametrize("kwargs", [dict(kind="call"), dict(style="bermudan"), dict(strike=0.0),
                                    dict(maturity=-1.0)])
def test_option_validation(kwargs):
    base = dict(kind="best_of_put", style="european", strike=100.0, maturity=T)
    base.update(kwargs)
    with pytest.raises(ValidationError):
        OptionSpec(**base)


def test_fourier_examples(q_markets):
    best = price_european_fourier(q_markets[0.30], OptionSpec("best_of_put", "european", 100, T))
    assert best.price == pytest.approx(0.71, abs=0.02)
    worst = price_european_fourier(q_markets[-0.30], OptionSpec("worst_of_put", "european", 110, T))
    assert worst.price == pytest.approx(12.63, abs=0.05)
    tiny = price_european_fourier(q_markets[0.0], OptionSpec("worst_of_put", "european", 1e-3, T))
    assert tiny.price < 1e-10


def test_fourier_rejects_american(q_markets):
    with pytest.raises(ValidationError):
        price_european_fourier(q_markets[0.0], OptionSpec("best_of_put", "american", 100, T))


def test_fourier_mass_guard(q_markets, monkeypatch):
    real = fourier_mod.density_R_fft

    def leaky(*args, **kwargs):
        g = real(*args, **kwargs)
        object.__setattr__(g, "raw_mass", 0.98)
        return g
    monkeypatch.setattr(fourier_mod, "density_R_fft", leaky)
    with pytest.raises(DomainError):
        price_european_fourier(q_markets[0.0], OptionSpec("best_of_put", "european", 100, T))


def test_fourier_grid_converged(q_markets):
    opt = OptionSpec("worst_of_put", "european", 100, T)
    fine = price_european_fourier(q_markets[0.0], opt, counts=2048, extent=12.0).price
    assert price_european_fourier(q_markets[0.0], opt).price == pytest.approx(fine, abs=1e-4)


def test_monte_carlo_deterministic(q_markets):
    opt = OptionSpec("worst_of_put", "european", 100, T)
    a = price_monte_carlo(q_markets[0.0], opt, 1, seed=42)
    b = price_monte_carlo(q_markets[0.0], opt, 1, seed=42)
    assert a.price == b.price
    assert isinstance(a, PriceResult) and a.method == "monte_carlo"


def test_monte_carlo_example(q_markets):
    res = price_monte_carlo(q_markets[0.0], OptionSpec("worst_of_put", "european", 90, T), 10 ** 6, seed=8)
    assert abs(res.price - 0.76) <= 3 * res.std_error


@pytest.mark.parametrize("kind", ["best_of_put", "worst_of_put"])
@pytest.mark.parametrize("K", [90, 100, 110])
def test_monte_carlo_against_fourier(q_markets, kind, K):
    opt = OptionSpec(kind, "european", K, T)
    mc = price_monte_carlo(q_markets[0.30], opt, 10 ** 6, seed=K)
    fou = price_european_fourier(q_markets[0.30], opt)
    assert abs(mc.price - fou.price) <= 3 * mc.std_error + 1e-4


def test_monte_carlo_rejects_american(q_markets):
    with pytest.raises(ValidationError):
        price_monte_carlo(q_markets[0.0], OptionSpec("best_of_put", "american", 100, T), 10)


@pytest.mark.parametrize("rho", RHOS)
def test_lattice_fourier_consistency(q_markets, lattice_pricers, rho):
    for K in STRIKES:
        for kind in ("best_of_put", "worst_of_put"):
            opt = OptionSpec(kind, "european", K, T)
            lat = lattice_pricers[rho].price(opt, diagnostics=False).price
            fou = price_european_fourier(q_markets[rho], opt).price
            assert abs(lat - fou) <= 0.02, (rho, K, kind, lat, fou)


def test_price_bounds(q_markets, lattice_pricers):
    r = q_markets[0.0].r
    for K in STRIKES:
        for style in ("european", "american"):
            opt = OptionSpec("worst_of_put", style, K, T)
            p = lattice_pricers[0.0].price(opt, diagnostics=False).price
            cap = K * np.exp(-r * T) if style == "european" else K
            assert 0 <= p <= cap
    assert set(PRICES) == {(rho, K) for rho in RHOS for K in STRIKES}
