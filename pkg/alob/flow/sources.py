"""Streaming sign sources for the event loop.

A source hands out one trade sign at a time. ``predict`` returns the private
conditional mean of the next sign before it is drawn, i.e. what a trader who
knows the generating model and its hidden state would forecast.
"""

from typing import Optional, Union

import numpy as np

from alob.flow.dar import DarParams, draw_marginal, gen_dar
from alob.flow.lmf import (
    LmfParams,
    LmfState,
    continuation_probability,
    continuation_table,
    gen_lmf,
    pareto_sizes,
)
from alob.stats.predictors import PRIVATE_DAR, PRIVATE_LMF, SignPrediction, SignWindow, dar_bound

BLOCK = 1 << 14

FlowParams = Optional[Union[DarParams, LmfParams]]


class _Uniforms:
    """Uniform draws consumed one at a time, generated in blocks."""

    def __init__(self, rng: np.random.Generator, block: int = BLOCK):
        self.rng = rng
        self.block = block
        self._buf = rng.random(block)
        self._pos = 0

    def next(self) -> float:
        if self._pos == self.block:
            self._buf = self.rng.random(self.block)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)


class IidSource:
    """Independent signs, the chi = 0 case of DAR."""

    kind = "iid"
    source = PRIVATE_DAR

    def __init__(self, rng: np.random.Generator, mu_z: float = 0.0):
        self.mu_z = mu_z
        self._u = _Uniforms(rng)

    def predict(self) -> float:
        return self.mu_z

    def forecast(self) -> SignPrediction:
        return SignPrediction(self.predict(), 0, self.source, abs(self.mu_z))

    def next_sign(self) -> int:
        return 1 if self._u.next() < (1.0 + self.mu_z) / 2.0 else -1


class DarSource:
    kind = "dar"
    source = PRIVATE_DAR

    def __init__(self, params: DarParams, rng: np.random.Generator):
        self.params = params
        self._u = _Uniforms(rng)
        self._lag_cdf = np.cumsum(params.phi_array)
        self._lag_cdf[-1] = 1.0
        self._window = SignWindow(params.p)
        for sign in draw_marginal(params.mu_z, params.p, rng):
            self._window.push(int(sign))
        for _ in range(10 * params.p):
            self.next_sign()

    def predict(self) -> float:
        return self._window.predict(self.params)

    def forecast(self) -> SignPrediction:
        return SignPrediction(self.predict(), 0, self.source, dar_bound(self.params))

    def next_sign(self) -> int:
        params = self.params
        if self._u.next() < params.chi:
            lag = int(np.searchsorted(self._lag_cdf, self._u.next(), side="right")) + 1
            sign = self._window.lagged(min(lag, params.p))
        else:
            sign = 1 if self._u.next() < (1.0 + params.mu_z) / 2.0 else -1
        self._window.push(sign)
        return sign


class LmfSource:
    """Single metaorder plus fair noise; a finished metaorder is replaced at
    the next metaorder trade."""

    kind = "lmf"
    source = PRIVATE_LMF

    def __init__(self, params: LmfParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng
        self._u = _Uniforms(rng)
        self._sizes = pareto_sizes(float(params.beta), int(params.l_max))
        self._continuation = continuation_table(float(params.beta), int(params.l_max))
        self.sign = 0
        self.size = 0
        self.executed = 0
        self._new_metaorder()

    def _new_metaorder(self) -> None:
        self.sign = 1 if self._u.next() < 0.5 else -1
        self.size = self._sizes.sample(self.rng)
        self.executed = 0

    @property
    def state(self) -> LmfState:
        return LmfState(self.sign, self.size, self.executed)

    def continuation(self) -> float:
        m = self.executed
        if m < self._continuation.size:
            return float(self._continuation[m])
        return float(continuation_probability(m, self.params.beta, self.params.l_max))

    def predict(self) -> float:
        return self.sign * self.params.pi * self.continuation()

    def forecast(self) -> SignPrediction:
        return SignPrediction(self.predict(), 0, self.source, self.params.pi)

    def next_sign(self) -> int:
        if self._u.next() < self.params.pi:
            if self.executed == self.size:
                self._new_metaorder()
            self.executed += 1
            return self.sign
        return 1 if self._u.next() < 0.5 else -1


SignSource = Union[IidSource, DarSource, LmfSource]


def make_source(params: FlowParams, rng: np.random.Generator) -> SignSource:
    if params is None:
        return IidSource(rng)
    if isinstance(params, DarParams):
        return DarSource(params, rng)
    if isinstance(params, LmfParams):
        return LmfSource(params, rng)
    raise TypeError(f"unsupported flow parameters {type(params).__name__}")


def sample_signs(params: FlowParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """A whole sign series from the same flow model, vectorised."""
    if params is None:
        return draw_marginal(0.0, n, rng)
    if isinstance(params, DarParams):
        return gen_dar(params, n, rng)
    if isinstance(params, LmfParams):
        return gen_lmf(params, n, rng).signs
    raise TypeError(f"unsupported flow parameters {type(params).__name__}")
