from dataclasses import dataclass

import numpy as np
from scipy import fft

from alob.errors import DegenerateSeries, SeriesTooShort


@dataclass(frozen=True)
class AutocorrEstimate:
    """Sample autocorrelation ``rho[k]`` for k = 0..K, with ``rho[0] == 1``."""

    rho: np.ndarray
    n_obs: int
    variance: float

    @property
    def max_lag(self) -> int:
        return self.rho.size - 1

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, self.rho.size)

    def autocovariance(self) -> np.ndarray:
        return self.rho * self.variance


def sample_autocorr(series, max_lag: int) -> AutocorrEstimate:
    """Biased (divide by n) sample autocorrelation up to ``max_lag``."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if n <= 10 * max_lag:
        raise SeriesTooShort(f"{n} observations are too few for lag {max_lag} (need > {10 * max_lag})")
    x = x - x.mean()
    variance = float(np.dot(x, x) / n)
    if variance <= 0.0:
        raise DegenerateSeries("series has zero variance")
    size = fft.next_fast_len(2 * n - 1)
    spectrum = fft.rfft(x, size)
    acov = fft.irfft(spectrum * np.conj(spectrum), size)[: max_lag + 1] / n
    rho = np.clip(acov / acov[0], -1.0, 1.0)
    rho[0] = 1.0
    return AutocorrEstimate(rho=rho, n_obs=n, variance=variance)
