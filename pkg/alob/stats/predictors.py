"""Sign predictors: the DAR conditional mean, its lagged forecasts and their quality."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from alob.errors import InsufficientHistory, InvalidParameters, LengthMismatch
from alob.flow.dar import DarParams

PUBLIC_DAR = "public-dar"
PRIVATE_LMF = "private-lmf"
PRIVATE_DAR = "private-dar"
ORACLE = "oracle"


@dataclass(frozen=True)
class SignPrediction:
    """A forecast of a future sign, tagged with the predictor that made it.

    ``bound`` caps ``|value|``: chi plus the drift for DAR forecasts, pi for
    the private metaorder forecast, 1 for the oracle.
    """

    value: float
    horizon: int = 0
    source: str = PUBLIC_DAR
    bound: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.bound <= 1.0:
            raise InvalidParameters(f"prediction bound must be in [0, 1], got {self.bound}")
        if not abs(self.value) <= self.bound + 1e-12:
            raise InvalidParameters(f"{self.source} prediction {self.value} outside [-{self.bound}, {self.bound}]")
        if self.horizon < 0:
            raise InvalidParameters(f"horizon must be >= 0, got {self.horizon}")


def dar_bound(params: DarParams) -> float:
    """Largest |forecast| a DAR model can produce."""
    return min(1.0, params.chi + (1.0 - params.chi) * abs(params.mu_z))


def _tail(params: DarParams, history: Sequence[int]) -> np.ndarray:
    history = np.asarray(history, dtype=float)
    if history.size < params.p:
        raise InsufficientHistory(f"need {params.p} past signs, got {history.size}")
    return history[history.size - params.p :]


def predict(params: DarParams, history: Sequence[int]) -> SignPrediction:
    """One-step conditional mean; ``history[-1]`` is the most recent sign."""
    past = _tail(params, history)
    value = float(np.dot(params.coefficients, past[::-1])) + params.mu_z * (1.0 - params.chi)
    return SignPrediction(value, 0, PUBLIC_DAR, dar_bound(params))


def predict_lagged(params: DarParams, history: Sequence[int], s: int) -> SignPrediction:
    """Forecast of the sign ``s`` trades after the next one.

    Unobserved signs inside the window are replaced by their own forecasts.
    """
    if s < 0:
        raise InvalidParameters(f"horizon must be >= 0, got {s}")
    p = params.p
    values = list(_tail(params, history))
    reversed_coefficients = params.coefficients[::-1]
    drift = params.mu_z * (1.0 - params.chi)
    for _ in range(s + 1):
        values.append(float(np.dot(reversed_coefficients, values[-p:])) + drift)
    return SignPrediction(values[-1], s, PUBLIC_DAR, dar_bound(params))


@lru_cache(maxsize=64)
def _lagged_filter(chi: float, phi: Tuple[float, ...], mu_z: float, s: int) -> Tuple[np.ndarray, float]:
    params = DarParams(chi, phi, mu_z)
    p = params.p
    # each row: weights on (eps_{n-1}, ..., eps_{n-p}) then a constant
    rows = np.zeros((p + s + 1, p + 1))
    rows[np.arange(p), p - 1 - np.arange(p)] = 1.0
    reversed_coefficients = params.coefficients[::-1]
    for k in range(s + 1):
        row = reversed_coefficients @ rows[k : k + p]
        row[p] += mu_z * (1.0 - params.chi)
        rows[p + k] = row
    return rows[-1, :p].copy(), float(rows[-1, p])


def lagged_filter(params: DarParams, s: int) -> Tuple[np.ndarray, float]:
    """Weights ``w[j-1]`` on ``eps_{n-j}`` and the constant of the s-lagged forecast."""
    return _lagged_filter(params.chi, params.phi, params.mu_z, int(s))


def dar_predictions(params: DarParams, series, s: int = 0) -> np.ndarray:
    """Lagged forecasts aligned on the forecast trade.

    ``out[t]`` uses the signs up to ``t - s - 1``; entries without a full
    window of p signs are NaN.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    p = params.p
    out = np.full(n, np.nan)
    first = p + s
    if n <= first:
        return out
    weights, constant = lagged_filter(params, s)
    full = signal.oaconvolve(x[: n - s - 1], weights)[p - 1 : n - s - 1]
    out[first:] = full + constant
    return out


@dataclass(frozen=True)
class MseResult:
    mse: float
    se: float
    null_bound: float
    n_obs: int


def mse(eps, eps_hat) -> MseResult:
    """Mean squared prediction error; positions where ``eps_hat`` is NaN are skipped."""
    eps = np.asarray(eps, dtype=float)
    eps_hat = np.asarray(eps_hat, dtype=float)
    if eps.shape != eps_hat.shape:
        raise LengthMismatch(f"{eps.size} signs against {eps_hat.size} predictions")
    keep = ~np.isnan(eps_hat)
    errors = (eps[keep] - eps_hat[keep]) ** 2
    n = errors.size
    if n == 0:
        raise LengthMismatch("no aligned predictions")
    se = float(errors.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return MseResult(float(errors.mean()), se, 1.0 + float(np.mean(eps_hat[keep] ** 2)), n)


def day_burn_in_mask(days, p: int) -> np.ndarray:
    """False for the first ``p`` trades of every day."""
    position = pd.Series(np.asarray(days)).groupby(np.asarray(days), sort=False).cumcount()
    return position.to_numpy() >= p


class SignWindow:
    """The last ``p`` signs in a ring buffer written twice so that the window is
    always one contiguous slice."""

    def __init__(self, p: int):
        if p < 1:
            raise ValueError(f"window length must be >= 1, got {p}")
        self.p = p
        self._buf = np.zeros(2 * p)
        self._pos = p - 1
        self.count = 0

    def push(self, sign: float) -> None:
        self._pos = (self._pos + 1) % self.p
        self._buf[self._pos] = sign
        self._buf[self._pos + self.p] = sign
        self.count += 1

    @property
    def full(self) -> bool:
        return self.count >= self.p

    def values(self) -> np.ndarray:
        """Chronological order, most recent last."""
        return self._buf[self._pos + 1 : self._pos + 1 + self.p]

    def lagged(self, k: int) -> int:
        """The sign ``k`` trades back (k = 1 is the latest)."""
        return int(self._buf[self._pos + self.p + 1 - k])

    def predict(self, params: DarParams) -> float:
        return float(np.dot(params.coefficients[::-1], self.values())) + params.mu_z * (1.0 - params.chi)


class DarPredictor:
    """Streaming public predictor fed with every realised sign."""

    source = PUBLIC_DAR

    def __init__(self, params: DarParams):
        self.params = params
        self._reversed = params.coefficients[::-1].copy()
        self._drift = params.mu_z * (1.0 - params.chi)
        self.window = SignWindow(params.p)

    @property
    def ready(self) -> bool:
        return self.window.full

    def push(self, sign: int) -> None:
        self.window.push(sign)

    def predict(self) -> float:
        if not self.ready:
            raise InsufficientHistory(f"need {self.params.p} past signs, got {self.window.count}")
        return float(np.dot(self._reversed, self.window.values())) + self._drift
