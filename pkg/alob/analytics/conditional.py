"""Book and impact quantities conditioned on the sign forecast or its correctness.

``x = eps * eps_hat`` is the correctness of the forecast the taker used; since
signs are +-1 that forecast is recovered as ``x * eps``.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd

from alob.analytics.binning import ConditionalCurve, conditional_curve, quantile_bins
from alob.sim.trade_log import TradeLog


def taker_prediction(log: TradeLog) -> np.ndarray:
    return log["x"] * log["eps"]


@dataclass(frozen=True)
class PenetrationStats:
    penetration: ConditionalCurve
    fraction: ConditionalCurve
    volume: ConditionalCurve
    opposite: ConditionalCurve

    def curves(self) -> Dict[str, ConditionalCurve]:
        return {
            "penetration": self.penetration,
            "fraction": self.fraction,
            "volume": self.volume,
            "opposite": self.opposite,
        }


def penetration_stats(log: TradeLog, k: int = 20) -> PenetrationStats:
    """P(pen|x), E[f|x], E[v_mo|x] and E[v_OB|x] with ``f = v_mo / v_OB``."""
    x = log["x"]
    eroded = log["v_mo"] / log["v_opp_best"].astype(float)
    return PenetrationStats(
        penetration=conditional_curve(log["penetrated"].astype(float), x, k),
        fraction=conditional_curve(eroded, x, k),
        volume=conditional_curve(log["v_mo"], x, k),
        opposite=conditional_curve(log["v_opp_best"], x, k),
    )


@dataclass(frozen=True)
class MechanicalImpact:
    """Approximation from penetration rates and quarter gaps, beside the measured
    ``E[eps r_mech | x]`` on the same bins."""

    approx: np.ndarray
    measured: ConditionalCurve
    buy_penetration: np.ndarray
    sell_penetration: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        frame = self.measured.to_frame()
        frame["approx"] = self.approx
        return frame


def _side_term(pen: np.ndarray, gap: np.ndarray, side: np.ndarray):
    n = int(side.sum())
    if n == 0:
        return np.nan, 0.0
    rate = float(pen[side].mean())
    swept = side & pen
    if not swept.any():
        return rate, 0.0
    return rate, rate * float(gap[swept].mean()) / 4.0


def mechanical_impact_approx(log: TradeLog, k: int = 20) -> MechanicalImpact:
    known = np.isfinite(log["x"])
    x = log["x"][known]
    eps = log["eps"][known]
    pen = log["penetrated"].astype(bool)[known]
    gap_ask = log["gap_ask"][known]
    gap_bid = log["gap_bid"][known]
    measured = conditional_curve(eps * log["r_mech"][known], x, k)
    bins = quantile_bins(x, k)
    approx = np.zeros(k)
    buy_rate = np.full(k, np.nan)
    sell_rate = np.full(k, np.nan)
    for b, idx in enumerate(bins):
        buys = np.zeros(x.size, dtype=bool)
        buys[idx] = eps[idx] > 0
        sells = np.zeros(x.size, dtype=bool)
        sells[idx] = eps[idx] < 0
        buy_rate[b], buy_term = _side_term(pen, gap_ask, buys)
        sell_rate[b], sell_term = _side_term(pen, gap_bid, sells)
        approx[b] = buy_term + sell_term
    return MechanicalImpact(approx, measured, buy_rate, sell_rate)


@dataclass(frozen=True)
class BookConditionals:
    v_ask: ConditionalCurve
    v_bid: ConditionalCurve
    gap_ask: ConditionalCurve
    gap_bid: ConditionalCurve
    imbalance: ConditionalCurve  # v_bid - v_ask

    def curves(self) -> Dict[str, ConditionalCurve]:
        return {
            "v_ask": self.v_ask,
            "v_bid": self.v_bid,
            "gap_ask": self.gap_ask,
            "gap_bid": self.gap_bid,
            "imbalance": self.imbalance,
        }


def book_conditionals(log: TradeLog, k: int = 20) -> BookConditionals:
    """Best volumes and gaps conditioned on the forecast ``eps_hat`` itself."""
    eps_hat = taker_prediction(log)
    return BookConditionals(
        v_ask=conditional_curve(log["v_ask"], eps_hat, k),
        v_bid=conditional_curve(log["v_bid"], eps_hat, k),
        gap_ask=conditional_curve(log["gap_ask"], eps_hat, k),
        gap_bid=conditional_curve(log["gap_bid"], eps_hat, k),
        imbalance=conditional_curve(log["v_bid"] - log["v_ask"].astype(float), eps_hat, k),
    )


@dataclass(frozen=True)
class ImpactDecomposition:
    mechanical: ConditionalCurve
    quote: ConditionalCurve
    total: ConditionalCurve

    def curves(self) -> Dict[str, ConditionalCurve]:
        return {"mechanical": self.mechanical, "quote": self.quote, "total": self.total}


def impact_decomposition(log: TradeLog, k: int = 20) -> ImpactDecomposition:
    x = log["x"]
    eps = log["eps"]
    return ImpactDecomposition(
        mechanical=conditional_curve(eps * log["r_mech"], x, k),
        quote=conditional_curve(eps * log["r_quote"], x, k),
        total=conditional_curve(eps * log["r"], x, k),
    )


def linear_fit(curve: ConditionalCurve):
    """Weighted least squares of bin means on bin centres: (slope, intercept, slope_se, intercept_se)."""
    keep = np.isfinite(curve.means) & np.isfinite(curve.se) & (curve.se > 0)
    x = curve.centers[keep]
    y = curve.means[keep]
    w = 1.0 / curve.se[keep] ** 2
    design = np.column_stack([x, np.ones_like(x)])
    normal = design.T @ (design * w[:, None])
    coef = np.linalg.solve(normal, design.T @ (w * y))
    cov = np.linalg.inv(normal)
    return float(coef[0]), float(coef[1]), float(np.sqrt(cov[0, 0])), float(np.sqrt(cov[1, 1]))

