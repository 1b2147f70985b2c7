"""Reduced efficient-price model ``r_n = A (eps_n - eps_hat_n) + eta_n``."""

from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np
import pandas as pd
import pydantic
from loguru import logger

from alob.errors import ConfigInvalid, InvalidParameters
from alob.flow.dar import DarParams, draw_marginal, gen_dar
from alob.flow.lmf import LmfParams, gen_lmf, lmf_private_predictions
from alob.flow.sources import sample_signs
from alob.sim.models import ReducedConfig
from alob.sim.streams import spawn_streams
from alob.stats.autocorr import sample_autocorr
from alob.stats.dar_fit import yule_walker_fit
from alob.stats.predictors import ORACLE, PRIVATE_DAR, PRIVATE_LMF, PUBLIC_DAR, dar_bound, dar_predictions


@dataclass(frozen=True)
class ReducedRun:
    log_prices: np.ndarray  # n + 1 values, starting at 0
    eps: np.ndarray
    eps_hat: np.ndarray
    r: np.ndarray
    fitted: Optional[DarParams] = None
    source: str = PUBLIC_DAR

    def __len__(self) -> int:
        return self.r.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "n": np.arange(self.r.size, dtype=np.int64),
                "eps": self.eps.astype(np.int64),
                "eps_hat": self.eps_hat,
                "p_log": self.log_prices[:-1],
                "r": self.r,
            }
        )


def _flow_with_private(params, n: int, rng: np.random.Generator):
    """Signs, the generating model's own predictions (no warm-up gap), their
    source tag and the bound on their size."""
    if params is None:
        return draw_marginal(0.0, n, rng), np.zeros(n), PRIVATE_DAR, 0.0
    if isinstance(params, DarParams):
        signs = gen_dar(params, n + params.p, rng)
        return signs[params.p :], dar_predictions(params, signs, 0)[params.p :], PRIVATE_DAR, dar_bound(params)
    if isinstance(params, LmfParams):
        path = gen_lmf(params, n, rng)
        return path.signs, lmf_private_predictions(path, params), PRIVATE_LMF, params.pi
    raise TypeError(f"unsupported flow parameters {type(params).__name__}")


def run_reduced(config: Union[ReducedConfig, Mapping]) -> ReducedRun:
    if not isinstance(config, ReducedConfig):
        try:
            config = ReducedConfig.model_validate(dict(config))
        except pydantic.ValidationError as e:
            raise ConfigInvalid(str(e)) from e
    streams = spawn_streams(config.seed)
    params = config.flow.to_params()
    n = config.n_trades
    kind = config.predictor.kind
    fitted = None

    if kind == "dar":
        p = config.predictor.p
        source = PUBLIC_DAR
        calibration = sample_signs(params, config.predictor.calibration_trades, streams["calibration"])
        fitted = yule_walker_fit(sample_autocorr(calibration, p), p)
        signs = sample_signs(params, n + p, streams["flow"])
        eps = signs[p:]
        eps_hat = dar_predictions(fitted, signs, 0)[p:]
        bound = dar_bound(fitted)
    else:
        eps, eps_hat, source, bound = _flow_with_private(params, n, streams["flow"])
        if kind == "oracle":
            eps_hat = eps.astype(float)
            source, bound = ORACLE, 1.0
    if np.any(np.abs(eps_hat) > bound + 1e-12):
        raise InvalidParameters(f"{source} predictions exceed their bound {bound}")

    eta = streams["noise"].normal(0.0, np.sqrt(config.sigma2), n)
    r = config.impact * (eps - eps_hat) + eta
    log_prices = np.concatenate(([0.0], np.cumsum(r)))
    logger.info(f"Reduced model: {n} trades, flow={config.flow.kind}, predictor={source}")
    return ReducedRun(log_prices, eps.astype(np.int8), eps_hat, r, fitted, source)
