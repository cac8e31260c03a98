"""Truncated Zipf degree model: exact survival, tail bounds and a sampler."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

SURVIVAL_BOUND_MIN_X = 10
_ZETA_TERMS = 1_000_000


@dataclass(frozen=True)
class ZipfModel:
    """Zipf law on ``1..n`` with ``P(x)`` proportional to ``x**-zipf_shape``."""

    n: int
    zipf_shape: float

    def __post_init__(self):
        if self.zipf_shape <= 1:
            raise ValueError(f"zipf_shape must exceed 1, got {self.zipf_shape}")
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")

    def pmf(self) -> np.ndarray:
        """Probabilities of ``1..n`` (index 0 holds value 1)."""
        w = _powers(self.n, self.zipf_shape)
        return w / math.fsum(w)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF draws."""
        cdf = np.cumsum(self.pmf())
        cdf[-1] = 1.0
        return np.searchsorted(cdf, rng.random(size), side="right") + 1


def _check_shape(alpha: float) -> None:
    if alpha <= 1:
        raise ValueError(f"shape must exceed 1, got {alpha}")


def _powers(n: int, alpha: float) -> np.ndarray:
    return np.arange(1, n + 1, dtype=np.float64) ** -alpha


def generalized_harmonic(n: int, alpha: float) -> float:
    """``H_{n,alpha}``, summed smallest term first."""
    if n <= 0:
        return 0.0
    return math.fsum(_powers(n, alpha)[::-1])


@functools.lru_cache(maxsize=64)
def zeta(alpha: float) -> float:
    """Riemann zeta for real ``alpha > 1``.

    A million-term partial sum plus the Euler-Maclaurin tail
    ``N^(1-a)/(a-1) - N^-a/2 + a N^(-a-1)/12``.
    """
    _check_shape(alpha)
    big_n = _ZETA_TERMS
    head = math.fsum(_powers(big_n - 1, alpha)[::-1])
    tail = big_n ** (1 - alpha) / (alpha - 1) + 0.5 * big_n**-alpha + alpha * big_n ** (-alpha - 1) / 12
    return head + tail


def zipf_survival_exact(model: ZipfModel, x) -> float:
    """``S(x) = P(D > x) = (H_n - H_x) / H_n``."""
    x = int(math.floor(x))
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x >= model.n:
        return 0.0
    w = _powers(model.n, model.zipf_shape)
    return math.fsum(w[x:][::-1]) / math.fsum(w[::-1])


def zipf_survival_curve(model: ZipfModel) -> np.ndarray:
    """``S(0..n)`` in one pass (reverse cumulative sums)."""
    w = _powers(model.n, model.zipf_shape)
    tails = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    return tails / tails[0]


def zipf_survival_bound(alpha: float, x) -> float:
    """``x^(1-alpha) / ((alpha-1) zeta(alpha))``, valid for ``x >= 10``."""
    _check_shape(alpha)
    if x < SURVIVAL_BOUND_MIN_X:
        raise ValueError(f"bound is only claimed for x >= {SURVIVAL_BOUND_MIN_X}")
    return x ** (1 - alpha) / ((alpha - 1) * zeta(alpha))


def high_degree_count_bound(n: int, delta0, b, alpha: float) -> float:
    """Upper bound on P(more than ``b`` of ``n`` vertices have degree >= ``delta0``)."""
    _check_shape(alpha)
    if delta0 < SURVIVAL_BOUND_MIN_X:
        raise ValueError(f"delta0 must be >= {SURVIVAL_BOUND_MIN_X}")
    if b < 1:
        raise ValueError("b must be at least 1")
    return min(1.0, n * delta0 ** (1 - alpha) / (b * (alpha - 1) * zeta(alpha)))


def high_degree_frequency(n: int, delta0: int, b: int, alpha: float, trials: int, seed) -> float:
    """Monte-Carlo frequency of "more than ``b`` degrees >= ``delta0``" over ``trials`` graphs."""
    model = ZipfModel(n, alpha)
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, 2_000_000 // max(n, 1))
    for start in range(0, trials, chunk):
        draws = model.sample((min(chunk, trials - start), n), rng)
        hits += int(np.count_nonzero((draws >= delta0).sum(axis=1) > b))
    return hits / trials
