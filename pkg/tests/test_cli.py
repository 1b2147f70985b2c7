import pandas as pd
import pytest
import yaml

from alob.cli import build_parser, main
from alob.io.csv_io import load_curve, load_trades

FULL_CONFIG = """\
# small book
mu = 0.1
lambda = 0.5
nu = 0.01
grid = 100
n_trades = 300
flow = lmf
beta = 1.5
pi = 0.6
"""


@pytest.fixture(scope="module")
def trades_csv(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "full.cfg"
    config.write_text(FULL_CONFIG)
    assert main(["simulate", str(config), "--seed", "7", "--out", str(root / "run")]) == 0
    return root / "run" / "trades.csv"


def test_simulate_writes_log_and_manifest(trades_csv):
    assert len(load_trades(trades_csv)) == 300
    manifest = yaml.safe_load((trades_csv.parent / "manifest.yaml").read_text())
    assert manifest["seed"] == 7 and manifest["model"] == "full"


def test_seed_is_required(tmp_path):
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["simulate", "x.cfg", "--out", str(tmp_path)])
    assert e.value.code == 1


def test_unknown_command():
    with pytest.raises(SystemExit) as e:
        main(["explode"])
    assert e.value.code == 1


def test_reduced(tmp_path):
    config = tmp_path / "reduced.cfg"
    config.write_text("model = reduced\nn_trades = 500\nchi = 0.4\n")
    assert main(["reduced", str(config), "--seed", "2", "--out", str(tmp_path / "out")]) == 0
    frame = pd.read_csv(tmp_path / "out" / "reduced.csv")
    assert list(frame.columns) == ["n", "eps", "eps_hat", "p_log", "r"]
    assert len(frame) == 500


def test_wrong_model_for_command(tmp_path):
    config = tmp_path / "reduced.cfg"
    config.write_text("model = reduced\n")
    assert main(["simulate", str(config), "--seed", "1", "--out", str(tmp_path)]) == 1


def test_invalid_value_exits_one(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text(FULL_CONFIG + "alpha = 2\n")
    assert main(["simulate", str(config), "--seed", "1", "--out", str(tmp_path)]) == 1


def test_missing_file_exits_two(tmp_path):
    assert main(["simulate", str(tmp_path / "absent.cfg"), "--seed", "1", "--out", str(tmp_path)]) == 2
    assert main(["analyze", str(tmp_path / "absent.csv"), "penetration", "--out", str(tmp_path)]) == 2


def test_fit_dar(trades_csv, tmp_path):
    out = tmp_path / "dar.yaml"
    assert main(["fit-dar", str(trades_csv), "--p", "5", "--out", str(out)]) == 0
    data = yaml.safe_load(out.read_text())
    assert data["p"] == 5
    assert len(data["phi"]) == 5 and len(data["raw_coefficients"]) == 5
    assert {"mse", "mse_se", "null_bound"} <= set(data)


def test_analyze_signature(trades_csv, tmp_path):
    assert main(["analyze", str(trades_csv), "signature", "--max-lag", "10", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "signature.csv")
    assert list(frame.columns) == ["lag", "sigma", "se"]
    assert frame["lag"].max() <= 10


def test_analyze_conditional(trades_csv, tmp_path):
    assert main(["analyze", str(trades_csv), "conditional", "--bins", "4", "--out", str(tmp_path)]) == 0
    for name in ("impact_total", "impact_mechanical", "book_imbalance", "mechanical_approx"):
        assert len(load_curve(tmp_path / f"{name}.csv")) == 4


def test_analyze_penetration(trades_csv, tmp_path):
    assert main(["analyze", str(trades_csv), "penetration", "--bins", "4", "--out", str(tmp_path)]) == 0
    assert load_curve(tmp_path / "penetration_penetration.csv")["count"].sum() == 300


def test_analyze_inefficiency_and_propagator(trades_csv, tmp_path):
    params = tmp_path / "dar.yaml"
    assert main(["fit-dar", str(trades_csv), "--p", "5", "--out", str(params)]) == 0
    args = ["analyze", str(trades_csv), "inefficiency", "--params", str(params), "--horizons", "0,1", "--bins", "3"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "inefficiency.csv")
    assert sorted(frame["s"].unique()) == [0, 1]

    args = ["analyze", str(trades_csv), "propagator", "--params", str(params), "--max-lag", "20"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    assert len(pd.read_csv(tmp_path / "propagator.csv")) == 20


def test_bad_horizons(trades_csv, tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["analyze", str(trades_csv), "inefficiency", "--horizons", "0,x", "--out", str(tmp_path)])
    assert e.value.code == 1


def test_ingest(tmp_path):
    rows = [
        {"timestamp": 0, "event": "quote", "bid": 99, "ask": 101, "bid_volume": 300, "ask_volume": 200,
         "bid_2nd": 98, "ask_2nd": 102},
        {"timestamp": 1, "event": "trade", "sign": 1, "shares": 200},
        {"timestamp": 2, "event": "quote", "bid": 99, "ask": 102, "bid_volume": 300, "ask_volume": 100,
         "bid_2nd": 98, "ask_2nd": 103},
    ]
    raw = tmp_path / "events.csv"
    pd.DataFrame(rows).assign(price=float("nan")).to_csv(raw, index=False)
    assert main(["ingest", str(raw), "--out", str(tmp_path / "trades.csv")]) == 0
    log = load_trades(tmp_path / "trades.csv")
    assert len(log) == 1 and bool(log["penetrated"][0])


def test_batch(tmp_path):
    paths = []
    for name in ("one", "two"):
        path = tmp_path / f"{name}.cfg"
        path.write_text("model = reduced\nn_trades = 200\n")
        paths.append(str(path))
    assert main(["batch", *paths, "--threads", "1", "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "one" / "manifest.yaml").exists()
    assert (tmp_path / "out" / "two" / "reduced.csv").exists()
