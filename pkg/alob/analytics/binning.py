from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd

from alob.errors import DegenerateBins, LengthMismatch


@dataclass(frozen=True)
class ConditionalCurve:
    """Per-bin mean of ``y`` over equal-count quantile bins of ``x``."""

    bin_lo: np.ndarray
    bin_hi: np.ndarray
    centers: np.ndarray
    means: np.ndarray
    se: np.ndarray
    counts: np.ndarray

    def __len__(self) -> int:
        return self.counts.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "bin_lo": self.bin_lo,
                "bin_hi": self.bin_hi,
                "bin_center": self.centers,
                "mean": self.means,
                "se": self.se,
                "count": self.counts.astype(np.int64),
            }
        )


def aligned(y, x):
    """Float copies of ``y`` and ``x`` with pairs holding a NaN removed."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape:
        raise LengthMismatch(f"{y.size} values against {x.size} conditioning values")
    keep = ~(np.isnan(y) | np.isnan(x))
    return y[keep], x[keep]


def quantile_bins(x, k: int) -> List[np.ndarray]:
    """Positions of ``x`` split into ``k`` consecutive groups of sorted values.

    Sizes differ by at most one; ties are broken by position.
    """
    x = np.asarray(x, dtype=float)
    if k < 2:
        raise ValueError(f"need at least 2 bins, got {k}")
    if np.unique(x).size < k:
        raise DegenerateBins(f"{np.unique(x).size} distinct values cannot fill {k} bins")
    return np.array_split(np.argsort(x, kind="stable"), k)


def mean_and_se(values: np.ndarray):
    n = values.size
    if n == 0:
        return np.nan, np.nan
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else np.nan
    return mean, se


def conditional_curve(y, x, k: int = 20) -> ConditionalCurve:
    y, x = aligned(y, x)
    bins = quantile_bins(x, k)
    lo, hi, centers, means, se, counts = (np.empty(k) for _ in range(6))
    for b, idx in enumerate(bins):
        xb = x[idx]
        lo[b], hi[b], centers[b] = xb.min(), xb.max(), xb.mean()
        means[b], se[b] = mean_and_se(y[idx])
        counts[b] = idx.size
    return ConditionalCurve(lo, hi, centers, means, se, counts.astype(np.int64))
