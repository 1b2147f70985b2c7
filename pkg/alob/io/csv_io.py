"""CSV files for trade logs and curve tables, YAML for fitted DAR parameters.

Floats are written in Python's shortest round-trip form and read back with
``float_precision="round_trip"``, so a reloaded log is bit-identical.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd
import yaml
from loguru import logger

from alob.errors import IoError, SchemaError
from alob.flow.dar import DarParams
from alob.sim.trade_log import COLUMNS, TradeLog

CURVE_COLUMNS = ["bin_lo", "bin_hi", "bin_center", "mean", "se", "count"]

PathLike = Union[str, Path]


def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def export_trades(log: TradeLog, path: PathLike) -> Path:
    frame = log.frame.copy()
    frame["penetrated"] = frame["penetrated"].astype(np.int64)
    return _write_frame(frame, path)


def export(obj: Any, path: PathLike) -> Path:
    """Write a trade log, a curve (anything with ``to_frame``) or a data frame."""
    if isinstance(obj, TradeLog):
        return export_trades(obj, path)
    if isinstance(obj, pd.DataFrame):
        return _write_frame(obj, path)
    if hasattr(obj, "to_frame"):
        return _write_frame(obj.to_frame(), path)
    raise TypeError(f"cannot export {type(obj).__name__}")


def read_csv(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.EmptyDataError) as e:
        raise IoError(f"cannot read {path}: {e}") from e


def load_trades(path: PathLike) -> TradeLog:
    frame = read_csv(path)
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path} lacks trade log columns {missing}")
    values = set(frame["penetrated"].dropna().unique().tolist())
    if not values <= {0, 1}:
        raise SchemaError(f"penetrated must be 0/1, found {sorted(values)}")
    frame["penetrated"] = frame["penetrated"].astype(bool)
    return TradeLog(frame)


def load_curve(path: PathLike) -> pd.DataFrame:
    frame = read_csv(path)
    if list(frame.columns[: len(CURVE_COLUMNS)]) != CURVE_COLUMNS:
        raise SchemaError(f"{path} is not a curve table")
    return frame


def write_params(
    params: DarParams,
    path: PathLike,
    raw: Optional[np.ndarray] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    data: Dict[str, Any] = {
        "p": params.p,
        "chi": float(params.chi),
        "mu_z": float(params.mu_z),
        "phi": [float(v) for v in params.phi],
        "coefficients": [float(v) for v in params.coefficients],
    }
    if raw is not None:
        data["raw_coefficients"] = [float(v) for v in raw]
    if extra:
        data.update(extra)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.info(f"Wrote DAR({params.p}) parameters to {path}")
    return path


def load_params(path: PathLike) -> DarParams:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    if not isinstance(data, dict) or "chi" not in data or "phi" not in data:
        raise SchemaError(f"{path} holds no DAR parameters")
    return DarParams(float(data["chi"]), tuple(data["phi"]), float(data.get("mu_z", 0.0)))
