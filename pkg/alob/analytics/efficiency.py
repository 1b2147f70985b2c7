"""Efficiency diagnostics: lagged-forecast inefficiency scans, the exact diffusion
constant of the reduced model, its propagator form and a least-squares impact fit."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy import linalg

from alob.analytics.binning import ConditionalCurve, aligned, conditional_curve, mean_and_se, quantile_bins
from alob.errors import LengthMismatch
from alob.flow.dar import DarParams
from alob.sim.trade_log import TradeLog
from alob.stats.autocorr import AutocorrEstimate
from alob.stats.predictors import dar_predictions

LAGGED_COLUMN = "eps_hat_pub_s{}"


@dataclass(frozen=True)
class HorizonScan:
    """Impact after correct (``x > 0``) and wrong (``x < 0``) forecasts per |x| bin."""

    s: int
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    mean_pos: np.ndarray
    se_pos: np.ndarray
    mean_neg: np.ndarray
    se_neg: np.ndarray
    violations: np.ndarray
    penetration: Optional[ConditionalCurve] = None

    @property
    def violated(self) -> bool:
        return bool(self.violations.any())


@dataclass(frozen=True)
class InefficiencyScan:
    horizons: List[HorizonScan]
    min_s: Optional[int]
    efficiency_time: Optional[float] = None
    by_s: Dict[int, HorizonScan] = field(default_factory=dict)


def _lagged_forecasts(log: TradeLog, s: int, params: Optional[DarParams]) -> np.ndarray:
    column = LAGGED_COLUMN.format(s)
    if column in log:
        return log[column]
    if s == 0 and params is None and "eps_hat_pub" in log and not np.all(np.isnan(log["eps_hat_pub"])):
        return log["eps_hat_pub"]
    if params is None:
        raise LengthMismatch(f"no column {column} and no DAR parameters to compute it")
    return dar_predictions(params, log["eps"], s)


def scan_horizon(eps, response, forecasts, s: int, k: int = 10, penetrated=None) -> HorizonScan:
    eps = np.asarray(eps, dtype=float)
    x = eps * np.asarray(forecasts, dtype=float)
    y, x = aligned(eps * np.asarray(response, dtype=float), x)
    magnitude = np.abs(x)
    cols = {name: np.full(k, np.nan) for name in ("lo", "hi", "mp", "sp", "mn", "sn")}
    violations = np.zeros(k, dtype=bool)
    for b, idx in enumerate(quantile_bins(magnitude, k)):
        xb, yb = x[idx], y[idx]
        cols["lo"][b], cols["hi"][b] = magnitude[idx].min(), magnitude[idx].max()
        cols["mp"][b], cols["sp"][b] = mean_and_se(yb[xb > 0])
        cols["mn"][b], cols["sn"][b] = mean_and_se(yb[xb < 0])
        spread = np.sqrt(cols["sp"][b] ** 2 + cols["sn"][b] ** 2)
        if np.isfinite(spread):
            violations[b] = cols["mp"][b] - cols["mn"][b] > 2.0 * spread
    penetration = None
    if penetrated is not None:
        penetration = conditional_curve(np.asarray(penetrated, dtype=float), eps * forecasts, k)
    return HorizonScan(
        s,
        cols["lo"],
        cols["hi"],
        cols["mp"],
        cols["sp"],
        cols["mn"],
        cols["sn"],
        violations,
        penetration,
    )


def inefficiency_scan(
    log: TradeLog,
    horizons: Sequence[int] = (0, 1, 2, 5, 10),
    params: Optional[DarParams] = None,
    k: int = 10,
) -> InefficiencyScan:
    """Smallest horizon ``s`` whose lagged public forecast shows no bin where the
    impact after a correct forecast exceeds the impact after a wrong one by
    more than two standard errors.

    Forecasts come from ``eps_hat_pub_s{s}`` columns when present, otherwise
    from ``params``.
    """
    scans = []
    for s in sorted(horizons):
        forecasts = _lagged_forecasts(log, s, params)
        scans.append(scan_horizon(log["eps"], log["r"], forecasts, s, k, log["penetrated"]))
    min_s = next((scan.s for scan in scans if not scan.violated), None)
    efficiency_time = None
    if min_s is not None and len(log) > 1:
        efficiency_time = float(min_s * np.mean(np.diff(log["t"])))
    logger.info(f"Inefficiency scan over s={list(sorted(horizons))}: minimal efficient s={min_s}")
    return InefficiencyScan(scans, min_s, efficiency_time, {scan.s: scan for scan in scans})


def diffusion_closed_form(params: DarParams, impact: float, sigma2: float, rho) -> float:
    """Per-trade variance ``sigma2 + A^2 (1 - chi^2 phi' R phi)`` of the reduced
    model, ``R`` the Toeplitz matrix of the sign autocorrelation."""
    rho = rho.rho if isinstance(rho, AutocorrEstimate) else np.asarray(rho, dtype=float)
    p = params.p
    if rho.size < p:
        raise LengthMismatch(f"autocorrelation up to lag {p - 1} needed, got {rho.size - 1}")
    phi = params.phi_array
    quadratic = float(phi @ linalg.toeplitz(rho[:p]) @ phi)
    return sigma2 + impact**2 * (1.0 - params.chi**2 * quadratic)


def propagator(params: DarParams, impact: float, l_max: int) -> np.ndarray:
    """``G(l) = A chi (1 - sum_{j<l} phi_j)`` for l = 1..l_max."""
    phi = np.zeros(max(l_max, params.p))
    phi[: params.p] = params.phi_array
    consumed = np.concatenate(([0.0], np.cumsum(phi)))[:l_max]
    return impact * params.chi * np.clip(1.0 - consumed, 0.0, None)


@dataclass(frozen=True)
class ImpactFit:
    impact: float
    se: float
    sigma2: float


def fit_impact(eps, eps_hat, r) -> ImpactFit:
    """Least-squares ``A`` in ``r = A (eps - eps_hat) + eta`` and the residual variance."""
    surprise = np.asarray(eps, dtype=float) - np.asarray(eps_hat, dtype=float)
    r = np.asarray(r, dtype=float)
    if surprise.shape != r.shape:
        raise LengthMismatch(f"{surprise.size} surprises against {r.size} returns")
    keep = ~(np.isnan(surprise) | np.isnan(r))
    u, r = surprise[keep], r[keep]
    impact = float(u @ r / (u @ u))
    residual = r - impact * u
    sigma2 = float(residual.var(ddof=1))
    return ImpactFit(impact, float(np.sqrt(sigma2 / (u @ u))), sigma2)
