"""Run configuration files.

A configuration is a flat list of ``key = value`` lines (``#`` starts a
comment) or, for ``.yaml``/``.yml`` files, a flat YAML mapping with the same
keys. ``model = reduced`` selects the reduced efficient-price model; the
default is the full book simulation.

Keys and defaults:

    model               full | reduced                          (full)
    mu, lambda, nu      market, limit and cancellation rates    (required, full)
    dt                  step length                             (1)
    tick, lot           tick size, shares per lot               (1, 100)
    grid                half-width of the tick window           (500)
    base_price          starting midprice in ticks              (1000)
    n_trades            recorded trades                         (100000)
    burn_in             warm-up steps                           (ceil(10 / (nu dt)))
    seed                master seed                             (0)
    check_warmup        fail on non-stationary warm-up depth    (true)
    flow                iid | dar | lmf                         (iid; dar for reduced)
    chi, phi, mu_z      DAR memory, lag weights (comma list), mean
    beta | gamma        metaorder size tail, gamma = beta - 1   (1.5)
    pi, l_max           participation ratio, size truncation    (1, 10^7)
    policy              toth | adaptive                         (adaptive)
    zeta                constant beta exponent                  (1)
    alpha, delta        adaptive policy                         (0.5, 0.05)
    predictor           private | dar | oracle                  (private)
    p                   DAR order of the public predictor       (500)
    calibration_trades  signs used to fit the public predictor  (10^6)
    impact, sigma2      reduced model A and eta variance        (0.01, 1e-4)
"""

from pathlib import Path
from typing import Any, Dict, Union

import pydantic
import yaml
from loguru import logger

from alob.errors import IoError, ParseError, ValidationError
from alob.sim.models import ReducedConfig, SimConfig

FLOW_KEYS = {"flow": "kind", "chi": "chi", "phi": "phi", "mu_z": "mu_z", "beta": "beta", "pi": "pi", "l_max": "l_max"}
POLICY_KEYS = {"policy": "kind", "zeta": "zeta", "alpha": "alpha", "delta": "delta"}
PREDICTOR_KEYS = {"predictor": "kind", "p": "p", "calibration_trades": "calibration_trades"}
FULL_KEYS = {
    "mu", "lambda", "nu", "dt", "tick", "lot", "grid", "base_price",
    "n_trades", "burn_in", "seed", "check_warmup",
}
REDUCED_KEYS = {"impact", "sigma2", "n_trades", "seed"}
NESTED = {"flow": FLOW_KEYS, "policy": POLICY_KEYS, "predictor": PREDICTOR_KEYS}
KNOWN_KEYS = FULL_KEYS | REDUCED_KEYS | set(FLOW_KEYS) | set(POLICY_KEYS) | set(PREDICTOR_KEYS) | {"model", "gamma"}

RunConfig = Union[SimConfig, ReducedConfig]


def parse_lines(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("empty key", number)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", number)
        values[key] = value
    return values


def _split_phi(value: Any):
    if isinstance(value, str):
        return tuple(float(v) for v in value.replace(" ", "").split(",") if v)
    return value


def _key_of(error: dict, nested_keys: Dict[str, Dict[str, str]]) -> str:
    loc = [str(part) for part in error.get("loc", ())]
    if len(loc) >= 2 and loc[0] in nested_keys:
        reverse = {field: key for key, field in nested_keys[loc[0]].items()}
        return reverse.get(loc[1], loc[1])
    if loc:
        return loc[0]
    return ""


def build_config(values: Dict[str, Any]) -> RunConfig:
    """Validate a flat key mapping into a run configuration."""
    values = dict(values)
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ValidationError(f"unknown key {unknown[0]!r}", unknown[0])
    model = str(values.pop("model", "full")).strip().lower()
    if model not in ("full", "reduced"):
        raise ValidationError(f"model must be 'full' or 'reduced', got {model!r}", "model")
    if "gamma" in values:
        if "beta" in values:
            raise ValidationError("give either beta or gamma, not both", "gamma")
        try:
            values["beta"] = float(values.pop("gamma")) + 1.0
        except ValueError as e:
            raise ValidationError(f"gamma: {e}", "gamma") from e

    own = FULL_KEYS if model == "full" else REDUCED_KEYS
    nested: Dict[str, Dict[str, Any]] = {group: {} for group in NESTED}
    top: Dict[str, Any] = {}
    for key, value in values.items():
        group = next((g for g, keys in NESTED.items() if key in keys), None)
        if group is not None:
            nested[group][NESTED[group][key]] = _split_phi(value) if key == "phi" else value
        elif key in own:
            top[key] = value
        else:
            raise ValidationError(f"key {key!r} does not apply to the {model} model", key)
    if model == "reduced" and nested["policy"]:
        key = next(iter(k for k in values if k in POLICY_KEYS))
        raise ValidationError(f"key {key!r} does not apply to the reduced model", key)
    if model == "reduced" and nested["flow"]:
        nested["flow"].setdefault("kind", "dar")
    for group, fields in nested.items():
        if fields:
            top[group] = fields

    target = SimConfig if model == "full" else ReducedConfig
    try:
        return target.model_validate(top)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        key = _key_of(first, NESTED)
        raise ValidationError(f"{key or model}: {first['msg']}", key or None) from e


def parse_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read configuration {path}: {e}") from e
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            values = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            line = getattr(getattr(e, "problem_mark", None), "line", None)
            raise ParseError(f"invalid YAML: {e}", None if line is None else line + 1) from e
        if not isinstance(values, dict):
            raise ParseError("YAML configuration must be a mapping")
    else:
        values = parse_lines(text)
    config = build_config(values)
    logger.debug(f"Loaded {type(config).__name__} from {path}")
    return config
