"""Single-metaorder order flow with noise traders.

One metaorder is active at a time. Each trade belongs to it with probability
``pi`` (the participation ratio), otherwise it is a fair noise sign. Sizes are
discrete Pareto, ``p_L ~ L^-(1+beta)`` truncated at ``l_max`` and normalised
by the truncated Hurwitz zeta sum.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import zeta

from alob.errors import InvalidParameters

TABLE_SIZE = 1 << 20
CONTINUATION_TABLE = 1 << 16


@dataclass(frozen=True)
class LmfParams:
    beta: float = 1.5
    pi: float = 1.0
    l_max: int = 10**7

    def __post_init__(self):
        if not self.beta > 1.0:
            raise InvalidParameters(f"beta must exceed 1 for a finite mean size, got {self.beta}")
        if not 0.0 < self.pi <= 1.0:
            raise InvalidParameters(f"pi must be in (0, 1], got {self.pi}")
        if self.l_max < 1:
            raise InvalidParameters(f"l_max must be >= 1, got {self.l_max}")

    @property
    def gamma(self) -> float:
        """Decay exponent of the sign autocorrelation."""
        return self.beta - 1.0


@dataclass(frozen=True)
class LmfState:
    sign: int
    size: int
    executed: int

    @property
    def active(self) -> bool:
        return self.executed < self.size


class ParetoSizes:
    """Inverse-CDF sampler of truncated discrete Pareto sizes on {1..l_max}.

    Sizes up to ``TABLE_SIZE`` come from a table of partial sums; the far
    tail is located by bisection on the Hurwitz zeta survival function.
    """

    def __init__(self, beta: float, l_max: int):
        self.beta = float(beta)
        self.l_max = int(l_max)
        self.s = 1.0 + self.beta
        self._tail_mass = float(zeta(self.s, self.l_max + 1))
        self.norm = float(zeta(self.s, 1)) - self._tail_mass
        k = np.arange(1, min(self.l_max, TABLE_SIZE) + 1, dtype=float)
        self._cdf = np.cumsum(k**-self.s) / self.norm

    def pmf(self, size) -> np.ndarray:
        size = np.asarray(size, dtype=float)
        return np.where((size >= 1) & (size <= self.l_max), size**-self.s / self.norm, 0.0)

    def survival(self, size) -> np.ndarray:
        """P(L >= size)."""
        size = np.asarray(size, dtype=float)
        return (zeta(self.s, size) - self._tail_mass) / self.norm

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        drawn = np.searchsorted(self._cdf, u, side="left") + 1
        tail = drawn > self._cdf.size
        if np.any(tail):
            drawn = np.where(tail, self._tail_quantile(np.atleast_1d(u)), drawn)
        drawn = np.minimum(drawn, self.l_max)
        if size is None:
            return int(np.ravel(drawn)[0])
        return drawn.astype(np.int64)

    def _tail_quantile(self, u: np.ndarray) -> np.ndarray:
        # smallest k with P(L <= k) >= u, i.e. P(L >= k + 1) <= 1 - u
        lo = np.full(u.shape, float(self._cdf.size + 1))
        hi = np.full(u.shape, float(self.l_max))
        while np.any(hi > lo):
            mid = np.floor((lo + hi) / 2.0)
            ok = self.survival(mid + 1.0) <= 1.0 - u
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid + 1.0)
        return hi.astype(np.int64)


@lru_cache(maxsize=16)
def pareto_sizes(beta: float, l_max: int) -> ParetoSizes:
    return ParetoSizes(beta, l_max)


def sample_pareto_size(beta: float, l_max: int, rng: np.random.Generator) -> int:
    if not beta > 1.0:
        raise InvalidParameters(f"beta must exceed 1, got {beta}")
    return pareto_sizes(float(beta), int(l_max)).sample(rng)


def continuation_probability(m, beta: float, l_max: int = None) -> np.ndarray:
    """Probability that a metaorder with ``m`` executed trades trades again.

    ``zeta(1+beta, m+1) / zeta(1+beta, m)``, with the truncated sums when
    ``l_max`` is given. ``m = 0`` gives 1.
    """
    m = np.asarray(m, dtype=float)
    s = 1.0 + beta
    tail = 0.0 if l_max is None else float(zeta(s, l_max + 1))
    safe = np.maximum(m, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = (zeta(s, safe + 1.0) - tail) / (zeta(s, safe) - tail)
    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    return np.where(m < 1.0, 1.0, ratio)


@lru_cache(maxsize=16)
def continuation_table(beta: float, l_max: int) -> np.ndarray:
    return continuation_probability(np.arange(CONTINUATION_TABLE), beta, l_max)


@dataclass(frozen=True)
class LmfPath:
    """Signs and the metaorder state seen before each trade."""

    signs: np.ndarray
    meta_sign: np.ndarray
    meta_size: np.ndarray
    executed: np.ndarray
    from_metaorder: np.ndarray

    def __len__(self) -> int:
        return self.signs.size

    def state(self, i: int) -> LmfState:
        return LmfState(int(self.meta_sign[i]), int(self.meta_size[i]), int(self.executed[i]))


def gen_lmf(params: LmfParams, n: int, rng: np.random.Generator) -> LmfPath:
    """Trade signs of the single-metaorder model and the pre-trade states.

    A finished metaorder stays in the state (its sign, ``executed == size``)
    until the next metaorder trade draws a replacement.
    """
    from_meta = rng.random(n) < params.pi
    noise = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    meta_trades = int(from_meta.sum())
    sizes = pareto_sizes(float(params.beta), int(params.l_max)).sample(rng, meta_trades + 1)
    signs_of_meta = np.where(rng.random(meta_trades + 1) < 0.5, 1, -1).astype(np.int8)
    ends = np.cumsum(sizes)
    starts = ends - sizes

    before = np.cumsum(from_meta) - from_meta  # metaorder trades strictly before i
    current = np.searchsorted(ends, np.maximum(before - 1, 0), side="right")
    executed = before - starts[current]
    owner = np.searchsorted(ends, before, side="right")
    signs = np.where(from_meta, signs_of_meta[np.minimum(owner, meta_trades)], noise)
    return LmfPath(
        signs=signs.astype(np.int8),
        meta_sign=signs_of_meta[current],
        meta_size=sizes[current],
        executed=executed.astype(np.int64),
        from_metaorder=from_meta,
    )


def lmf_private_predictions(path: LmfPath, params: LmfParams) -> np.ndarray:
    """``s_n * pi * P_m`` for every trade of ``path``."""
    table = continuation_table(float(params.beta), int(params.l_max))
    m = path.executed
    inside = m < table.size
    cont = np.empty(m.size, dtype=float)
    cont[inside] = table[m[inside]]
    if not np.all(inside):
        cont[~inside] = continuation_probability(m[~inside], params.beta, params.l_max)
    return path.meta_sign * params.pi * cont
