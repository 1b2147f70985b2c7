"""Signature plot ``sigma(l) = sqrt(E[(p_{n+l} - p_n)^2] / l)`` over trade lags."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from alob.errors import SeriesTooShort


@dataclass(frozen=True)
class SignaturePlot:
    lags: np.ndarray
    sigma: np.ndarray
    se: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"lag": self.lags, "sigma": self.sigma, "se": self.se})

    def between(self, lo: int, hi: int) -> "SignaturePlot":
        keep = (self.lags >= lo) & (self.lags <= hi)
        return SignaturePlot(self.lags[keep], self.sigma[keep], self.se[keep])


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float

    def significant(self, threshold: float = 0.0, sigmas: float = 2.0) -> bool:
        """True when the slope exceeds ``threshold`` by more than ``sigmas`` errors."""
        return self.slope - sigmas * self.stderr > threshold


def default_lags(max_lag: int, points: int = 30) -> np.ndarray:
    return np.unique(np.round(np.logspace(0.0, np.log10(max_lag), points)).astype(np.int64))


def _log_prices(source) -> np.ndarray:
    return np.asarray(getattr(source, "log_prices", source), dtype=float)


def signature_plot(source, lags: Optional[Sequence[int]] = None, batches: int = 20) -> SignaturePlot:
    """Overlapping-window estimator with batch-means standard errors.

    ``source`` is a log-price array or anything with a ``log_prices``
    attribute (a trade log, a reduced run).
    """
    prices = _log_prices(source)
    lags = default_lags(max(1, prices.size // 10 - 1)) if lags is None else np.asarray(lags, dtype=np.int64)
    max_lag = int(lags.max())
    if prices.size <= 10 * max_lag:
        raise SeriesTooShort(f"{prices.size} prices are too few for lag {max_lag}")
    sigma = np.empty(lags.size)
    se = np.empty(lags.size)
    for i, lag in enumerate(lags):
        squared = (prices[lag:] - prices[:-lag]) ** 2 / lag
        sigma[i] = np.sqrt(squared.mean())
        means = np.array([b.mean() for b in np.array_split(squared, batches)])
        se_mean = means.std(ddof=1) / np.sqrt(batches)
        se[i] = se_mean / (2.0 * sigma[i]) if sigma[i] > 0 else 0.0
    return SignaturePlot(lags, sigma, se)


def log_log_slope(lags, values, lo: Optional[float] = None, hi: Optional[float] = None) -> SlopeFit:
    """Least-squares slope of ``log(values)`` against ``log(lags)`` on [lo, hi]."""
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if lo is not None:
        keep &= lags >= lo
    if hi is not None:
        keep &= lags <= hi
    if keep.sum() < 3:
        raise SeriesTooShort(f"{keep.sum()} positive points in range, need 3 for a slope")
    fit = stats.linregress(np.log(lags[keep]), np.log(values[keep]))
    return SlopeFit(float(fit.slope), float(fit.stderr), float(fit.intercept))


def signature_slope(plot: SignaturePlot, lo: float = 1, hi: Optional[float] = None) -> SlopeFit:
    return log_log_slope(plot.lags, plot.sigma, lo, hi)
