"""Fixed-step event loop of the zero-intelligence book with a policy-driven taker.

Every step of length ``dt`` applies, in this order, Poisson limit placements
on every window tick, one cancellation pass, a recentring check, and with
probability ``mu * dt`` one market order.
"""

import math
import time
from typing import Mapping, Optional, Union

import numpy as np
import pydantic
from loguru import logger

from alob.book.order_book import OrderBook, Side
from alob.errors import ConfigInvalid, NonStationaryWarmup
from alob.flow.sources import make_source, sample_signs
from alob.sim.models import SimConfig
from alob.sim.streams import spawn_streams
from alob.sim.trade_log import DTYPES, TradeLog
from alob.stats.autocorr import sample_autocorr
from alob.stats.dar_fit import yule_walker_fit
from alob.stats.predictors import DarPredictor
from alob.taker.policy import G_FLOOR, AdaptivePolicy, fraction_from_uniform, market_volume

STEP_BLOCK = 256
WARMUP_TOLERANCE = 0.2
FAR_DISTANCE = 10


def validate_config(config: Union[SimConfig, Mapping]) -> SimConfig:
    if isinstance(config, SimConfig):
        return config
    try:
        return SimConfig.model_validate(dict(config))
    except pydantic.ValidationError as e:
        raise ConfigInvalid(str(e)) from e


class Simulator:
    def __init__(self, config: SimConfig):
        self.config = config
        self.streams = spawn_streams(config.seed)
        self.book = self._seeded_book()
        self.flow_params = config.flow.to_params()
        self.source = make_source(self.flow_params, self.streams["flow"])
        self.policy = config.policy.build()
        self.public: Optional[DarPredictor] = None
        if config.predictor.kind == "dar":
            self.public = DarPredictor(self._calibrate())

        self.steps = 0
        self.trades = 0
        self.clamped_volumes = 0
        self.clamped_exponents = 0
        self.skipped_trades = 0

    def _seeded_book(self) -> OrderBook:
        config = self.config
        book = OrderBook(config.tick, config.lot, config.grid, config.base_price)
        rng = self.streams["refill"]
        center = config.grid
        lots = rng.poisson(config.depth_lots, size=book.size)
        book.depth[Side.BID, :center] = lots[:center] * config.lot
        book.depth[Side.ASK, center + 1 :] = lots[center + 1 :] * config.lot
        # both sides need a quote for the midpoint to exist
        if book.best_index(Side.BID) is None:
            book.depth[Side.BID, center - 1] = config.lot
        if book.best_index(Side.ASK) is None:
            book.depth[Side.ASK, center + 1] = config.lot
        return book

    def _calibrate(self):
        spec = self.config.predictor
        signs = sample_signs(self.flow_params, spec.calibration_trades, self.streams["calibration"])
        params = yule_walker_fit(sample_autocorr(signs, spec.p), spec.p)
        logger.info(
            f"Calibrated public DAR({spec.p}) on {spec.calibration_trades} signs: chi={params.chi:.4f}"
        )
        return params

    def _check_warmup(self) -> None:
        depth = self.book.far_depth_lots(FAR_DISTANCE)
        target = self.config.depth_lots
        if not abs(depth - target) <= WARMUP_TOLERANCE * target:
            raise NonStationaryWarmup(
                f"mean far depth {depth:.2f} lots after warm-up, expected {target:.2f} within {WARMUP_TOLERANCE:.0%}"
            )
        logger.debug(f"Warm-up depth {depth:.2f} lots per tick (stationary {target:.2f})")

    def _steps(self):
        """Yield after every step that carries a market order."""
        config = self.config
        lam_dt = config.lambda_ * config.dt
        nu_dt = config.nu * config.dt
        mu_dt = config.mu * config.dt
        limits = self.streams["limits"]
        cancels = self.streams["cancels"]
        arrivals = self.streams["arrivals"]
        refill = self.streams["refill"]
        book = self.book
        while True:
            placements = limits.poisson(lam_dt, size=(STEP_BLOCK, book.size))
            coins = arrivals.random(STEP_BLOCK)
            for k in range(STEP_BLOCK):
                book.add_arrivals(placements[k])
                book.cancel_pass(nu_dt, cancels)
                book.recenter(config.depth_lots, refill)
                self.steps += 1
                if coins[k] < mu_dt:
                    yield

    def run(self) -> TradeLog:
        config = self.config
        n = config.n_trades
        columns = {name: np.zeros(n, dtype=dtype) for name, dtype in DTYPES.items()}
        fractions = self.streams["fraction"]
        private_taker = config.predictor.kind == "private"
        adaptive = isinstance(self.policy, AdaptivePolicy)
        skip = config.predictor.p if self.public is not None else 0
        burn_in = config.burn_in_steps
        warmed = False
        recorded = 0
        pending_after = None
        started = time.perf_counter()
        logger.info(
            f"Simulating {n} trades: flow={config.flow.kind}, policy={config.policy.kind}, "
            f"predictor={config.predictor.kind}, seed={config.seed}"
        )

        steps = self._steps()
        while recorded < n:
            next(steps)
            book = self.book
            snap = book.snapshot(allow_thin=True)

            if not warmed and self.steps >= burn_in:
                warmed = True
                if config.check_warmup:
                    self._check_warmup()

            eps_hat_priv = self.source.forecast().value
            eps = self.source.next_sign()
            eps_hat_pub = self.public.predict() if self.public is not None and self.public.ready else math.nan
            eps_hat = eps_hat_priv if private_taker else eps_hat_pub
            if math.isnan(eps_hat):
                eps_hat = 0.0
            x = eps * eps_hat

            exponent = self.policy.exponent(x)
            if adaptive and exponent <= G_FLOOR:
                self.clamped_exponents += 1
            f = fraction_from_uniform(fractions.random(), exponent)
            v_opp = snap.opposite_volume(eps)
            volume = market_volume(self.policy, f, v_opp)
            available = book.available(eps)
            if volume > available:
                self.clamped_volumes += 1
                logger.debug(f"Market volume {volume} clamped to {available} at step {self.steps}")
                volume = available
            if self.public is not None:
                self.public.push(eps)
            if volume < 1:
                self.skipped_trades += 1
                continue
            report = book.execute_market(eps, volume)
            self.trades += 1

            if not warmed:
                continue
            if skip > 0:
                skip -= 1
                continue
            i = recorded
            if pending_after is not None:
                columns["r_quote"][i - 1] = snap.log_mid - pending_after
            columns["n"][i] = i
            columns["t"][i] = self.steps * config.dt
            columns["eps"][i] = eps
            columns["eps_hat_pub"][i] = eps_hat_pub
            columns["eps_hat_priv"][i] = eps_hat_priv
            columns["x"][i] = x
            columns["p_log"][i] = snap.log_mid
            columns["v_ask"][i] = snap.ask_volume
            columns["v_bid"][i] = snap.bid_volume
            columns["gap_ask"][i] = snap.gap_ask
            columns["gap_bid"][i] = snap.gap_bid
            columns["f"][i] = f
            columns["v_mo"][i] = volume
            columns["v_opp_best"][i] = v_opp
            columns["penetrated"][i] = report.penetrated
            columns["r_mech"][i] = report.r_mech
            pending_after = report.log_mid_after
            recorded += 1

        # the last return closes at the next market order arrival
        next(steps)
        columns["r_quote"][n - 1] = self.book.log_mid() - pending_after
        columns["r"] = columns["r_mech"] + columns["r_quote"]

        if self.clamped_volumes or self.skipped_trades:
            logger.warning(
                f"{self.clamped_volumes} market volumes clamped to available liquidity, "
                f"{self.skipped_trades} orders skipped on a single-lot side"
            )
        if self.clamped_exponents:
            logger.warning(f"{self.clamped_exponents} policy exponents raised to {G_FLOOR}")
        logger.info(
            f"Simulated {self.steps} steps, {self.trades} trades, recorded {n} "
            f"in {time.perf_counter() - started:.1f}s"
        )
        return TradeLog.from_columns(**columns)


def run(config: Union[SimConfig, Mapping]) -> TradeLog:
    return Simulator(validate_config(config)).run()
