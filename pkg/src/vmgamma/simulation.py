"""Exact sampling of Y(t) and R(t) by drawing the Gamma factors first."""
import numpy as np

from .errors import DomainError
from .process import as_params
from .transforms import MarketModel

__all__ = ["sample_Y", "sample_R", "CHUNK"]

CHUNK = 1_000_000


def _chunks(size, seed):
    n_chunks = max(1, -(-size // CHUNK))
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    for i, ss in enumerate(seqs):
        yield min(CHUNK, size - i * CHUNK), np.random.default_rng(ss)


def _sample_Y_chunk(params, t, size, rng):
    G = rng.gamma(shape=params.b * t, scale=1.0 / params.b, size=(size, params.n))
    T = G @ params.M.T
    Z = rng.standard_normal((size, params.d))
    return T * params.mu + np.sqrt(T * params.sigma) * Z


def sample_Y(params, t: float, size: int, seed=None) -> np.ndarray:
    """Draw ``size`` independent copies of ``Y(t)``; shape ``(size, d)``.

    Conditional on the clock ``T(t) = sum_l G_l M_l`` the coordinates are
    independent normals. Draws are made in fixed-size chunks, each from its
    own child of ``seed``, so the output depends only on ``seed`` and ``size``.
    """
    params = as_params(params)
    if not t > 0:
        raise DomainError("t must be positive")
    size = int(size)
    out = np.empty((size, params.d))
    pos = 0
    for n, rng in _chunks(size, seed):
        out[pos:pos + n] = _sample_Y_chunk(params, t, n, rng)
        pos += n
    return out


def sample_R(market: MarketModel, t: float, size: int, seed=None) -> np.ndarray:
    """Draw ``size`` copies of the log-return vector ``R(t)``; shape ``(size, k)``."""
    Y = sample_Y(market.params, t, size, seed)
    return market.drift * t + Y @ market.A.T
