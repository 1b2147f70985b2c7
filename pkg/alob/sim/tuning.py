from dataclasses import dataclass, field
from typing import List, Tuple

from loguru import logger

from alob.analytics.signature import signature_plot, signature_slope
from alob.sim.engine import run
from alob.sim.models import PolicySpec, SimConfig

SHORT_LAGS = tuple(range(1, 11))


@dataclass(frozen=True)
class ZetaTuning:
    zeta: float
    slope: float
    trials: List[Tuple[float, float]] = field(default_factory=list)


def short_lag_slope(config: SimConfig, zeta: float) -> float:
    trial = config.model_copy(update={"policy": PolicySpec(kind="toth", zeta=zeta)})
    plot = signature_plot(run(trial), SHORT_LAGS)
    return signature_slope(plot).slope


def tune_toth_zeta(
    config: SimConfig, lo: float = 0.1, hi: float = 10.0, iterations: int = 8
) -> ZetaTuning:
    """Bisect (geometrically) for the constant exponent that flattens the
    signature plot over lags 1..10.

    When the slope has the same sign at both ends the end with the flatter
    plot is returned.
    """
    trials = []
    slope_lo = short_lag_slope(config, lo)
    slope_hi = short_lag_slope(config, hi)
    trials += [(lo, slope_lo), (hi, slope_hi)]
    if slope_lo * slope_hi > 0:
        best = min(trials, key=lambda t: abs(t[1]))
        logger.warning(f"Signature slope keeps its sign on [{lo}, {hi}]; keeping zeta={best[0]}")
        return ZetaTuning(best[0], best[1], trials)
    for _ in range(iterations):
        mid = (lo * hi) ** 0.5
        slope = short_lag_slope(config, mid)
        trials.append((mid, slope))
        logger.debug(f"zeta={mid:.4f}: short-lag slope {slope:+.4f}")
        if slope * slope_lo > 0:
            lo, slope_lo = mid, slope
        else:
            hi, slope_hi = mid, slope
    best = min(trials, key=lambda t: abs(t[1]))
    logger.info(f"Tuned zeta={best[0]:.4f} with short-lag slope {best[1]:+.4f}")
    return ZetaTuning(best[0], best[1], trials)
