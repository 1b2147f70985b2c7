"""Ingestion of external event logs into the trade log schema.

An event log holds ``trade`` and ``quote`` rows ordered by timestamp. Quote
rows carry the best quotes, best volumes and second-best prices after the
event; trade rows carry the sign and executed shares. Prices are in ticks.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from alob.config import settings
from alob.errors import SchemaError, UnorderedTimestamps
from alob.flow.dar import DarParams
from alob.io.csv_io import read_csv
from alob.sim.trade_log import TradeLog
from alob.stats.autocorr import sample_autocorr
from alob.stats.dar_fit import yule_walker_fit
from alob.stats.predictors import dar_predictions, day_burn_in_mask

EVENT_COLUMNS = [
    "timestamp", "event", "sign", "price", "shares",
    "bid", "ask", "bid_volume", "ask_volume", "bid_2nd", "ask_2nd",
]
QUOTE_COLUMNS = ["bid", "ask", "bid_volume", "ask_volume", "bid_2nd", "ask_2nd"]


def _validate(events: pd.DataFrame) -> pd.DataFrame:
    missing = [c for c in EVENT_COLUMNS if c not in events.columns]
    if missing:
        raise SchemaError(f"event log lacks columns {missing}")
    events = events.reset_index(drop=True).copy()
    kinds = set(events["event"].unique().tolist())
    if not kinds <= {"trade", "quote"}:
        raise SchemaError(f"unknown event types {sorted(kinds - {'trade', 'quote'})}")
    try:
        events["timestamp"] = pd.to_numeric(events["timestamp"])
    except (TypeError, ValueError) as e:
        raise SchemaError(f"timestamps must be numeric: {e}") from e
    if (np.diff(events["timestamp"].to_numpy()) < 0).any():
        raise UnorderedTimestamps("timestamps decrease")
    trades = events["event"] == "trade"
    if not events.loc[trades, "sign"].isin([1, -1]).all():
        raise SchemaError("trade signs must be +1 or -1")
    return events


def merge_executions(events: pd.DataFrame) -> pd.DataFrame:
    """Consecutive trade rows with the same timestamp and sign become one trade."""
    trade = (events["event"] == "trade").to_numpy()
    ts = events["timestamp"].to_numpy()
    sign = events["sign"].to_numpy()
    same = np.zeros(len(events), dtype=bool)
    same[1:] = trade[1:] & trade[:-1] & (ts[1:] == ts[:-1]) & (sign[1:] == sign[:-1])
    group = np.cumsum(~same)
    merged = events.groupby(group, sort=False).agg({**{c: "first" for c in events.columns}, "shares": "sum"})
    merged = merged[events.columns].reset_index(drop=True)
    if same.any():
        logger.info(f"Merged {int(same.sum())} executions into same-timestamp market orders")
    return merged


def _public_predictions(eps: np.ndarray, days: np.ndarray, p: int, params: Optional[DarParams]):
    """Public DAR forecasts and the parameters behind them.

    ``None`` parameters mean no forecasts were made, either because the order
    is 0 or because there are too few trades to fit it.
    """
    nothing = np.full(eps.size, np.nan)
    if p <= 0 and params is None:
        return nothing, None
    if params is None:
        if eps.size <= 10 * p:
            logger.warning(f"{eps.size} trades are too few to fit DAR({p}); public forecasts left empty")
            return nothing, None
        params = yule_walker_fit(sample_autocorr(eps, p), p)
        logger.info(f"Fitted DAR({p}) on {eps.size} ingested trades: chi={params.chi:.4f}")
    # history never crosses a day boundary, so the first p trades of a day stay empty
    out = dar_predictions(params, eps, 0)
    out[~day_burn_in_mask(days, params.p)] = np.nan
    return out, params


def ingest(
    source: Union[str, Path, pd.DataFrame],
    tick_size: Optional[float] = None,
    p: Optional[int] = None,
    params: Optional[DarParams] = None,
) -> TradeLog:
    events = read_csv(source) if not isinstance(source, pd.DataFrame) else source
    events = merge_executions(_validate(events))
    tick_size = settings.ingest.tick_size if tick_size is None else tick_size
    p = settings.ingest.dar_order if p is None else p

    is_trade = (events["event"] == "trade").to_numpy()
    quotes = events.loc[~is_trade, QUOTE_COLUMNS].astype(float)
    mids = np.log((quotes["bid"].to_numpy() + quotes["ask"].to_numpy()) / 2.0 * tick_size)
    quote_pos = np.flatnonzero(~is_trade)
    trade_pos = np.flatnonzero(is_trade)

    # last quote strictly before each trade, and the first quote after it
    before = np.searchsorted(quote_pos, trade_pos, side="left") - 1
    keep = before >= 0
    dropped = int((~keep).sum())
    if dropped:
        logger.warning(f"Dropped {dropped} trades with no preceding quote")
    trade_pos, before = trade_pos[keep], before[keep]
    n = trade_pos.size
    if n == 0:
        return TradeLog.empty()

    after = before + 1
    next_trade = np.append(trade_pos[1:], len(events))
    has_after = (after < quote_pos.size) & (quote_pos[np.minimum(after, quote_pos.size - 1)] < next_trade)
    pre = mids[before]
    post = np.where(has_after, mids[np.minimum(after, quote_pos.size - 1)], pre)
    following = np.append(pre[1:], mids[-1] if quote_pos[-1] > trade_pos[-1] else post[-1])

    trades = events.iloc[trade_pos]
    snap = quotes.iloc[before]
    eps = trades["sign"].to_numpy().astype(np.int64)
    shares = trades["shares"].to_numpy().astype(np.int64)
    v_ask = snap["ask_volume"].to_numpy().astype(np.int64)
    v_bid = snap["bid_volume"].to_numpy().astype(np.int64)
    v_opp = np.where(eps > 0, v_ask, v_bid)
    days = trades["day"].to_numpy() if "day" in trades.columns else np.zeros(n, dtype=np.int64)
    eps_hat, _ = _public_predictions(eps, days, p, params)

    r_mech = post - pre
    r_quote = following - post
    columns = {
        "n": np.arange(n, dtype=np.int64),
        "t": trades["timestamp"].to_numpy().astype(float),
        "eps": eps,
        "eps_hat_pub": eps_hat,
        "eps_hat_priv": np.full(n, np.nan),
        "x": eps * eps_hat,
        "p_log": pre,
        "v_ask": v_ask,
        "v_bid": v_bid,
        "gap_ask": np.log(snap["ask_2nd"].to_numpy()) - np.log(snap["ask"].to_numpy()),
        "gap_bid": np.log(snap["bid"].to_numpy()) - np.log(snap["bid_2nd"].to_numpy()),
        "f": shares / v_opp.astype(float),
        "v_mo": shares,
        "v_opp_best": v_opp,
        "penetrated": shares >= v_opp,
        "r_mech": r_mech,
        "r_quote": r_quote,
        "r": r_mech + r_quote,
    }
    if "day" in trades.columns:
        columns["day"] = days
    logger.info(f"Ingested {n} trades from {len(events)} events")
    return TradeLog.from_columns(**columns)
