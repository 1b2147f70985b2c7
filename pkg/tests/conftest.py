import numpy as np
import pytest

from alob.sim.engine import run
from alob.sim.models import FlowSpec, PolicySpec, SimConfig
from alob.sim.trade_log import DTYPES, TradeLog


def small_config(**overrides) -> SimConfig:
    values = dict(
        mu=0.1,
        nu=0.01,
        grid=100,
        n_trades=300,
        seed=7,
        flow=FlowSpec(kind="lmf", beta=1.5, pi=0.6),
        policy=PolicySpec(kind="adaptive", alpha=0.5, delta=0.05),
    )
    values["lambda"] = 0.5
    values.update(overrides)
    return SimConfig.model_validate(values)


@pytest.fixture
def config_factory():
    return small_config


@pytest.fixture(scope="session")
def simulated_log() -> TradeLog:
    return run(small_config())


@pytest.fixture
def make_log():
    """Trade log with every column filled, overridden by keyword arrays."""

    def factory(n: int, **columns) -> TradeLog:
        data = {}
        for name, dtype in DTYPES.items():
            if name in columns:
                data[name] = np.asarray(columns.pop(name))
            elif name == "n":
                data[name] = np.arange(n)
            elif name == "t":
                data[name] = np.arange(n, dtype=float) * 10.0
            elif name == "eps":
                data[name] = np.ones(n, dtype=np.int64)
            elif dtype == "int64":
                data[name] = np.full(n, 100, dtype=np.int64)
            elif dtype == "bool":
                data[name] = np.zeros(n, dtype=bool)
            else:
                data[name] = np.zeros(n)
        data.update({k: np.asarray(v) for k, v in columns.items()})
        return TradeLog.from_columns(**data)

    return factory
