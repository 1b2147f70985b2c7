"""Yule-Walker estimation of DAR(p) parameters."""

import numpy as np
from loguru import logger
from scipy import linalg

from alob.errors import InvalidMemory, SingularSystem
from alob.flow.dar import DarParams
from alob.stats.autocorr import AutocorrEstimate

MAX_CONDITION = 1e12
SMOOTHING_WINDOW = 10


def yule_walker_solve(acf: AutocorrEstimate, p: int) -> np.ndarray:
    """Raw coefficients ``chi * phi_i``, i = 1..p, from the first p equations."""
    if p < 1:
        raise ValueError(f"order must be >= 1, got {p}")
    if acf.max_lag < p:
        raise ValueError(f"autocorrelation known to lag {acf.max_lag}, order {p} needs lag {p}")
    system = linalg.toeplitz(acf.rho[:p])
    try:
        condition = np.linalg.cond(system)
        if not np.isfinite(condition) or condition > MAX_CONDITION:
            raise SingularSystem(f"Toeplitz system of order {p} is ill-conditioned ({condition:.3g})")
        coefficients = linalg.solve(system, acf.rho[1 : p + 1], assume_a="sym")
    except linalg.LinAlgError as e:
        raise SingularSystem(f"Toeplitz system of order {p} is singular: {e}") from e
    total = float(coefficients.sum())
    if total >= 1.0:
        raise InvalidMemory(f"fitted memory {total:.6f} is not below 1")
    return coefficients


def moving_average(values: np.ndarray, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Centred moving average over offsets ``[-window//2, window - window//2 - 1]``,
    truncated at both ends."""
    values = np.asarray(values, dtype=float)
    n = values.size
    before = window // 2
    after = window - before - 1
    csum = np.concatenate(([0.0], np.cumsum(values)))
    i = np.arange(n)
    lo = np.maximum(i - before, 0)
    hi = np.minimum(i + after + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def smooth_and_project(coefficients, window: int = SMOOTHING_WINDOW, mu_z: float = 0.0) -> DarParams:
    """Smooth raw ``chi * phi`` coefficients, clip negatives, and renormalise."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.size < 1:
        raise ValueError("need at least one coefficient")
    smoothed = np.clip(moving_average(coefficients, window), 0.0, None)
    chi = float(smoothed.sum())
    if chi >= 1.0:
        raise InvalidMemory(f"smoothed memory {chi:.6f} is not below 1")
    return DarParams.from_coefficients(smoothed, mu_z)


def yule_walker_fit(acf: AutocorrEstimate, p: int, window: int = SMOOTHING_WINDOW) -> DarParams:
    raw = yule_walker_solve(acf, p)
    params = smooth_and_project(raw, window)
    logger.debug(f"Fitted DAR({p}): raw memory {raw.sum():.4f}, smoothed chi {params.chi:.4f}")
    return params
