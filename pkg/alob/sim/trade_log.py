from dataclasses import dataclass, fields
from typing import List

import numpy as np
import pandas as pd

from alob.errors import SchemaError

DTYPES = {
    "n": "int64",
    "t": "float64",
    "eps": "int64",
    "eps_hat_pub": "float64",
    "eps_hat_priv": "float64",
    "x": "float64",
    "p_log": "float64",
    "v_ask": "int64",
    "v_bid": "int64",
    "gap_ask": "float64",
    "gap_bid": "float64",
    "f": "float64",
    "v_mo": "int64",
    "v_opp_best": "int64",
    "penetrated": "bool",
    "r_mech": "float64",
    "r_quote": "float64",
    "r": "float64",
}
COLUMNS = list(DTYPES)


@dataclass(frozen=True)
class TradeRecord:
    n: int
    t: float
    eps: int
    eps_hat_pub: float
    eps_hat_priv: float
    x: float
    p_log: float
    v_ask: int
    v_bid: int
    gap_ask: float
    gap_bid: float
    f: float
    v_mo: int
    v_opp_best: int
    penetrated: bool
    r_mech: float
    r_quote: float
    r: float


class TradeLog:
    """One row per market order, quantities taken immediately before the trade.

    ``r`` runs from this trade's pre-trade log-mid to the next one, split
    into the mechanical part ``r_mech`` and the quote revision ``r_quote``.
    Extra columns (a ``day`` label, lagged predictions) ride along.
    """

    def __init__(self, frame: pd.DataFrame):
        missing = [c for c in COLUMNS if c not in frame.columns]
        if missing:
            raise SchemaError(f"trade log lacks columns {missing}")
        extra = [c for c in frame.columns if c not in DTYPES]
        self.frame = frame[COLUMNS + extra].astype(DTYPES).reset_index(drop=True)

    @classmethod
    def empty(cls) -> "TradeLog":
        return cls(pd.DataFrame({c: pd.Series(dtype=d) for c, d in DTYPES.items()}))

    @classmethod
    def from_columns(cls, **columns) -> "TradeLog":
        return cls(pd.DataFrame(columns))

    def __len__(self) -> int:
        return len(self.frame)

    def __getitem__(self, column: str) -> np.ndarray:
        return self.frame[column].to_numpy()

    def __contains__(self, column: str) -> bool:
        return column in self.frame.columns

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    @property
    def log_prices(self) -> np.ndarray:
        return self["p_log"]

    def record(self, i: int) -> TradeRecord:
        return TradeRecord(**{f.name: self.frame[f.name].to_numpy()[i].item() for f in fields(TradeRecord)})

    def with_column(self, name: str, values) -> "TradeLog":
        frame = self.frame.copy()
        frame[name] = values
        return TradeLog(frame)

    def equals(self, other: "TradeLog") -> bool:
        return self.frame.equals(other.frame)
