import numpy as np
import pytest

from vmgamma import baseline_market, baseline_params, risk_neutral_market
from vmgamma.pricing import LatticePricer


@pytest.fixture
def params():
    return baseline_params()


@pytest.fixture(scope="session")
def q_markets():
    """Pricing-measure markets at r = 0.10 keyed by rho."""
    out = {}
    for rho in (0.30, 0.00, -0.30):
        out[rho], _ = risk_neutral_market(baseline_market(rho, r=0.10))
    return out


@pytest.fixture(scope="session")
def lattice_pricers(q_markets):
    return {rho: LatticePricer(qm) for rho, qm in q_markets.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
