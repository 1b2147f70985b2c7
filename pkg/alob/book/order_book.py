import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Optional

import numpy as np
from loguru import logger

from alob.errors import (
    CrossingOrder,
    EmptySide,
    InsufficientLiquidity,
    OutsideGrid,
    ThinSide,
)


class Side(IntEnum):
    BID = 0
    ASK = 1


def opposite_side(sign: int) -> Side:
    """Side consumed by a market order of the given sign."""
    return Side.ASK if sign > 0 else Side.BID


@dataclass(frozen=True)
class BookSnapshot:
    ask: float
    bid: float
    ask_2nd: float
    bid_2nd: float
    ask_volume: int
    bid_volume: int
    mid: float
    log_mid: float
    log_ask: float
    log_bid: float
    gap_ask: float
    gap_bid: float

    def opposite_volume(self, sign: int) -> int:
        return self.ask_volume if sign > 0 else self.bid_volume

    def opposite_gap(self, sign: int) -> float:
        return self.gap_ask if sign > 0 else self.gap_bid


@dataclass(frozen=True)
class ExecutionReport:
    executed: int
    levels_consumed: int
    r_mech: float
    penetrated: bool
    log_mid_before: float
    log_mid_after: float


class OrderBook:
    """Two-sided book on a window of ``2 * half_width + 1`` integer ticks.

    Each cell holds the resting shares of one side at one tick. A tick is
    the price in units of ``tick_size``; ticks are positive integers.
    """

    def __init__(
        self,
        tick_size: float = 1.0,
        lot_size: int = 100,
        half_width: int = 500,
        center: int = 1000,
    ):
        if half_width < 2:
            raise ValueError(f"half_width must be >= 2, got {half_width}")
        if center - half_width < 1:
            raise ValueError("window must stay on positive ticks")
        self.tick_size = float(tick_size)
        self.lot_size = int(lot_size)
        self.half_width = int(half_width)
        self.origin = int(center) - self.half_width
        self.depth = np.zeros((2, 2 * self.half_width + 1), dtype=np.int64)

    @classmethod
    def from_levels(
        cls,
        bids: Dict[int, int],
        asks: Dict[int, int],
        tick_size: float = 1.0,
        lot_size: int = 100,
        half_width: int = 500,
    ) -> "OrderBook":
        """Build a book from lot counts per tick, window centred on the midpoint."""
        ticks = list(bids) + list(asks)
        center = (max(bids) + min(asks)) // 2 if bids and asks else ticks[0]
        center = max(center, half_width + 1)
        book = cls(tick_size, lot_size, half_width, center)
        for side, levels in ((Side.BID, bids), (Side.ASK, asks)):
            for tick, lots in levels.items():
                book.depth[side, book._index(tick)] += int(lots) * book.lot_size
        if bids and asks and max(bids) >= min(asks):
            raise CrossingOrder(f"crossed levels: bid {max(bids)} >= ask {min(asks)}")
        return book

    @property
    def size(self) -> int:
        return self.depth.shape[1]

    def _index(self, tick: int) -> int:
        idx = int(tick) - self.origin
        if not 0 <= idx < self.size:
            raise OutsideGrid(
                f"tick {tick} outside window [{self.origin}, {self.origin + self.size - 1}]"
            )
        return idx

    def levels(self, side: Side) -> Dict[int, int]:
        idx = np.flatnonzero(self.depth[side])
        return {int(i) + self.origin: int(self.depth[side, i]) for i in idx}

    @property
    def bids(self) -> Dict[int, int]:
        return self.levels(Side.BID)

    @property
    def asks(self) -> Dict[int, int]:
        return self.levels(Side.ASK)

    def total_shares(self, side: Side) -> int:
        return int(self.depth[side].sum())

    def best_index(self, side: Side, rank: int = 0) -> Optional[int]:
        idx = np.flatnonzero(self.depth[side])
        if idx.size <= rank:
            return None
        return int(idx[-1 - rank]) if side == Side.BID else int(idx[rank])

    def best_tick(self, side: Side) -> Optional[int]:
        idx = self.best_index(side)
        return None if idx is None else idx + self.origin

    def mid_index(self) -> Optional[float]:
        bid = self.best_index(Side.BID)
        ask = self.best_index(Side.ASK)
        if bid is None or ask is None:
            return None
        return (bid + ask) / 2.0

    def price(self, tick: float) -> float:
        return tick * self.tick_size

    def log_mid(self) -> float:
        bid = self.best_index(Side.BID)
        ask = self.best_index(Side.ASK)
        if bid is None or ask is None:
            raise EmptySide("midprice undefined on a one-sided book")
        return math.log((self.price(ask + self.origin) + self.price(bid + self.origin)) / 2.0)

    def available(self, sign: int) -> int:
        """Shares a market order of ``sign`` may take without emptying the side."""
        total = self.total_shares(opposite_side(sign))
        return total - min(self.lot_size, total)

    # events

    def place_limit(self, side: Side, tick: int, lots: int = 1) -> None:
        idx = self._index(tick)
        bid = self.best_index(Side.BID)
        ask = self.best_index(Side.ASK)
        if bid is not None and ask is not None:
            mid = (bid + ask) / 2.0
            crossing = idx >= mid if side == Side.BID else idx <= mid
        elif side == Side.BID:
            crossing = ask is not None and idx >= ask
        else:
            crossing = bid is not None and idx <= bid
        if crossing:
            raise CrossingOrder(f"{side.name} limit at tick {tick} does not rest on its side")
        self.depth[side, idx] += int(lots) * self.lot_size

    def add_arrivals(self, arrivals: np.ndarray) -> None:
        """Add ``arrivals[i]`` lots at every window tick, bids below the mid and asks above."""
        mid = self.mid_index()
        if mid is None:
            raise EmptySide("placement needs both sides to locate the midpoint")
        bid_end = math.ceil(mid)
        ask_start = math.floor(mid) + 1
        self.depth[Side.BID, :bid_end] += arrivals[:bid_end] * self.lot_size
        self.depth[Side.ASK, ask_start:] += arrivals[ask_start:] * self.lot_size

    def cancel_pass(self, prob: float, rng: np.random.Generator) -> int:
        """Remove each resting lot independently with probability ``prob``.

        A partially executed lot counts as one lot. The last lot at the best
        level of a side is never removed. Returns the shares removed.
        """
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f"cancellation probability must be in [0, 1], got {prob}")
        depth = self.depth
        full = depth // self.lot_size
        rem = depth - full * self.lot_size
        removed = rng.binomial(full, prob) * self.lot_size
        removed += np.where((rem > 0) & (rng.random(depth.shape) < prob), rem, 0)
        for side in Side:
            total = int(depth[side].sum())
            if total and int(removed[side].sum()) == total:
                best = self.best_index(side)
                keep = min(self.lot_size, int(depth[side, best]))
                removed[side, best] -= keep
        depth -= removed
        return int(removed.sum())

    def execute_market(self, sign: int, volume: int) -> ExecutionReport:
        side = opposite_side(sign)
        if volume < 1 or volume > self.available(sign):
            raise InsufficientLiquidity(
                f"volume {volume} exceeds available {self.available(sign)} on {side.name}"
            )
        before = self.log_mid()
        row = self.depth[side]
        idx = np.flatnonzero(row)
        if side == Side.BID:
            idx = idx[::-1]
        best_volume = int(row[idx[0]])
        left = int(volume)
        consumed = 0
        for i in idx:
            take = min(left, int(row[i]))
            row[i] -= take
            left -= take
            if row[i] == 0:
                consumed += 1
            if left == 0:
                break
        after = self.log_mid()
        return ExecutionReport(
            executed=int(volume),
            levels_consumed=consumed,
            r_mech=after - before,
            penetrated=volume >= best_volume,
            log_mid_before=before,
            log_mid_after=after,
        )

    def recenter(self, seed_lots: float, rng: np.random.Generator) -> int:
        """Shift the window back onto the midpoint once it drifts past half the half-width.

        Newly exposed ticks are seeded with Poisson(``seed_lots``) lots on
        the side they fall on. Returns the shift in ticks (0 if none).
        """
        mid = self.mid_index()
        if mid is None or abs(mid - self.half_width) <= self.half_width / 2:
            return 0
        shift = int(round(mid)) - self.half_width
        if self.origin + shift < 1:
            shift = 1 - self.origin
            if shift == 0:
                return 0
        size = self.size
        moved = np.zeros_like(self.depth)
        if abs(shift) < size:
            if shift > 0:
                moved[:, : size - shift] = self.depth[:, shift:]
            else:
                moved[:, -shift:] = self.depth[:, : size + shift]
        seeds = rng.poisson(seed_lots, size=min(abs(shift), size)) * self.lot_size
        if shift > 0:
            moved[Side.ASK, size - seeds.size :] += seeds
        else:
            moved[Side.BID, : seeds.size] += seeds
        self.depth = moved
        self.origin += shift
        logger.debug(f"Recentred book window by {shift} ticks, origin now {self.origin}")
        return shift

    # state

    def snapshot(self, allow_thin: bool = False) -> BookSnapshot:
        """Best quotes, volumes and log gaps immediately before a trade.

        With ``allow_thin`` a side holding a single level reports a second
        best one tick further away instead of raising ``ThinSide``.
        """
        bid = self.best_index(Side.BID)
        ask = self.best_index(Side.ASK)
        if bid is None or ask is None:
            raise EmptySide("snapshot needs both sides of the book")
        bid_2nd = self.best_index(Side.BID, 1)
        ask_2nd = self.best_index(Side.ASK, 1)
        if bid_2nd is None or ask_2nd is None:
            if not allow_thin:
                raise ThinSide("a side holds a single level; gap undefined")
            bid_2nd = bid - 1 if bid_2nd is None else bid_2nd
            ask_2nd = ask + 1 if ask_2nd is None else ask_2nd
        A = self.price(ask + self.origin)
        B = self.price(bid + self.origin)
        A2 = self.price(ask_2nd + self.origin)
        B2 = self.price(bid_2nd + self.origin)
        mid = (A + B) / 2.0
        log_ask = math.log(A)
        log_bid = math.log(B)
        return BookSnapshot(
            ask=A,
            bid=B,
            ask_2nd=A2,
            bid_2nd=B2,
            ask_volume=int(self.depth[Side.ASK, ask]),
            bid_volume=int(self.depth[Side.BID, bid]),
            mid=mid,
            log_mid=math.log(mid),
            log_ask=log_ask,
            log_bid=log_bid,
            gap_ask=math.log(A2) - log_ask,
            gap_bid=log_bid - math.log(B2),
        )

    def far_depth_lots(self, distance: int = 10) -> float:
        """Mean lots per tick on ticks at least ``distance`` ticks behind the best quotes."""
        bid = self.best_index(Side.BID)
        ask = self.best_index(Side.ASK)
        if bid is None or ask is None:
            raise EmptySide("depth undefined on a one-sided book")
        far_bids = self.depth[Side.BID, : max(bid - distance + 1, 0)]
        far_asks = self.depth[Side.ASK, ask + distance :]
        ticks = far_bids.size + far_asks.size
        if ticks == 0:
            return float("nan")
        return (far_bids.sum() + far_asks.sum()) / (ticks * self.lot_size)
