import math
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from alob.errors import AlobError
from alob.flow.dar import DarParams
from alob.flow.lmf import LmfParams
from alob.taker.policy import AdaptivePolicy, TothPolicy

MAX_STEP_PROBABILITY = 0.2


class FlowSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["iid", "dar", "lmf"] = "iid"
    chi: float = Field(default=0.5, ge=0, lt=1)
    phi: Tuple[float, ...] = (1.0,)
    mu_z: float = Field(default=0.0, ge=-1, le=1)
    beta: float = Field(default=1.5, gt=1)
    pi: float = Field(default=1.0, gt=0, le=1)
    l_max: int = Field(default=10**7, ge=1)

    @model_validator(mode="after")
    def check_params(self):
        try:
            self.to_params()
        except AlobError as e:
            raise ValueError(str(e)) from e
        return self

    def to_params(self):
        if self.kind == "dar":
            return DarParams(self.chi, self.phi, self.mu_z)
        if self.kind == "lmf":
            return LmfParams(self.beta, self.pi, self.l_max)
        return None


class PolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["toth", "adaptive"] = "adaptive"
    zeta: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=0.5, gt=0, le=0.5)
    delta: float = Field(default=0.05, gt=0, lt=1)

    @model_validator(mode="after")
    def check_params(self):
        self.build()
        return self

    def build(self):
        if self.kind == "toth":
            return TothPolicy(self.zeta)
        return AdaptivePolicy(self.alpha, self.delta)


class PredictorSpec(BaseModel):
    """Where the taker's sign forecast comes from.

    ``private`` is the generating model's own conditional mean, ``dar`` a
    DAR(p) fitted on a calibration sample, ``oracle`` the realised sign
    itself (reduced model only).
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["private", "dar", "oracle"] = "private"
    p: int = Field(default=500, ge=1)
    calibration_trades: int = Field(default=10**6, ge=1)

    @model_validator(mode="after")
    def check_calibration(self):
        if self.kind == "dar" and self.calibration_trades <= 10 * self.p:
            raise ValueError(
                f"calibration_trades must exceed 10 * p = {10 * self.p} to fit DAR({self.p})"
            )
        return self


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mu: float = Field(gt=0)
    lambda_: float = Field(alias="lambda", gt=0)
    nu: float = Field(gt=0)
    dt: float = Field(default=1.0, gt=0)
    tick: float = Field(default=1.0, gt=0)
    lot: int = Field(default=100, ge=1)
    grid: int = Field(default=500, ge=2)
    base_price: int = Field(default=1000, ge=1)
    n_trades: int = Field(default=10**5, ge=1)
    burn_in: Optional[int] = Field(default=None, ge=0)
    seed: int = 0
    check_warmup: bool = True
    flow: FlowSpec = FlowSpec()
    policy: PolicySpec = PolicySpec()
    predictor: PredictorSpec = PredictorSpec()

    @model_validator(mode="after")
    def check_thinning(self):
        if self.mu * self.dt > MAX_STEP_PROBABILITY:
            raise ValueError(f"mu * dt = {self.mu * self.dt} exceeds {MAX_STEP_PROBABILITY}")
        if self.nu * self.dt > MAX_STEP_PROBABILITY:
            raise ValueError(f"nu * dt = {self.nu * self.dt} exceeds {MAX_STEP_PROBABILITY}")
        if self.base_price <= self.grid:
            raise ValueError(f"base_price {self.base_price} must exceed grid {self.grid}")
        if self.predictor.kind == "oracle":
            raise ValueError("the oracle predictor is only available in the reduced model")
        return self

    @property
    def depth_lots(self) -> float:
        """Stationary lots per tick far from the spread."""
        return self.lambda_ / self.nu

    @property
    def rho_inf(self) -> float:
        return self.lambda_ * self.tick / self.nu

    @property
    def burn_in_steps(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return math.ceil(10.0 / (self.nu * self.dt))


class ReducedConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    impact: float = Field(default=0.01, ge=0)
    sigma2: float = Field(default=1e-4, ge=0)
    n_trades: int = Field(default=10**5, ge=1)
    seed: int = 0
    flow: FlowSpec = FlowSpec(kind="dar")
    predictor: PredictorSpec = PredictorSpec()
