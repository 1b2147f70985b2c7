import numpy as np
import pandas as pd
import pytest

from alob.analytics.binning import conditional_curve
from alob.errors import IoError, ParseError, SchemaError, UnorderedTimestamps, ValidationError
from alob.flow.dar import DarParams
from alob.io.batch import REDUCED_FILE, TRADES_FILE, execute, run_batch
from alob.io.config_file import build_config, parse_config, parse_lines
from alob.io.csv_io import export, load_curve, load_params, load_trades, read_csv, write_params
from alob.io.ingest import ingest, merge_executions
from alob.io.manifest import MANIFEST_NAME, RunManifest, config_hash
from alob.sim.models import ReducedConfig, SimConfig

FULL = {"mu": "0.1", "lambda": "0.5", "nu": "0.01"}


class TestParseLines:
    def test_comments_and_blank_lines(self):
        text = "# rates\nmu = 0.1\n\nlambda=0.5  # per tick\n"
        assert parse_lines(text) == {"mu": "0.1", "lambda": "0.5"}

    def test_missing_equals(self):
        with pytest.raises(ParseError) as e:
            parse_lines("mu = 0.1\nnu 0.01\n")
        assert e.value.line == 2
        assert str(e.value).startswith("line 2:")

    def test_duplicate_key(self):
        with pytest.raises(ParseError) as e:
            parse_lines("mu = 0.1\nmu = 0.2\n")
        assert e.value.line == 2


class TestBuildConfig:
    def test_full_model(self):
        config = build_config({**FULL, "flow": "lmf", "gamma": "0.5", "pi": "0.6", "policy": "toth", "zeta": "2"})
        assert isinstance(config, SimConfig)
        assert config.lambda_ == 0.5
        assert config.flow.beta == pytest.approx(1.5)
        assert config.flow.pi == 0.6
        assert config.policy.kind == "toth" and config.policy.zeta == 2.0

    def test_phi_list(self):
        config = build_config({**FULL, "flow": "dar", "chi": "0.4", "phi": "0.5, 0.3,0.2"})
        assert config.flow.phi == (0.5, 0.3, 0.2)

    def test_booleans_and_integers(self):
        config = build_config({**FULL, "check_warmup": "false", "n_trades": "300", "seed": "9"})
        assert config.check_warmup is False
        assert config.n_trades == 300

    def test_reduced_model(self):
        config = build_config({"model": "reduced", "impact": "0.02", "chi": "0.3"})
        assert isinstance(config, ReducedConfig)
        assert config.flow.kind == "dar"
        assert config.flow.chi == 0.3

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as e:
            build_config({**FULL, "speed": "3"})
        assert e.value.key == "speed"

    def test_key_of_other_model(self):
        with pytest.raises(ValidationError) as e:
            build_config({"model": "reduced", "mu": "0.1"})
        assert e.value.key == "mu"
        with pytest.raises(ValidationError) as e:
            build_config({"model": "reduced", "zeta": "2"})
        assert e.value.key == "zeta"

    def test_beta_and_gamma(self):
        with pytest.raises(ValidationError) as e:
            build_config({**FULL, "beta": "1.5", "gamma": "0.5"})
        assert e.value.key == "gamma"

    def test_out_of_range_value_names_the_key(self):
        with pytest.raises(ValidationError) as e:
            build_config({**FULL, "alpha": "0.9"})
        assert e.value.key == "alpha"
        with pytest.raises(ValidationError) as e:
            build_config({"lambda": "0.5", "nu": "0.01"})
        assert e.value.key == "mu"

    def test_bad_model(self):
        with pytest.raises(ValidationError) as e:
            build_config({"model": "hybrid"})
        assert e.value.key == "model"


class TestParseConfig:
    def test_key_value_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("mu = 0.1\nlambda = 0.5\nnu = 0.01\nflow = lmf\n")
        assert parse_config(path).flow.kind == "lmf"

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("model: reduced\nimpact: 0.02\nphi: [0.5, 0.5]\nchi: 0.4\n")
        config = parse_config(path)
        assert isinstance(config, ReducedConfig)
        assert config.flow.phi == (0.5, 0.5)

    def test_yaml_must_be_mapping(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("- mu\n- nu\n")
        with pytest.raises(ParseError):
            parse_config(path)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "run.yml"
        path.write_text("mu: [0.1\n")
        with pytest.raises(ParseError):
            parse_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            parse_config(tmp_path / "absent.cfg")


class TestCsv:
    def test_trade_log_round_trip_is_exact(self, simulated_log, tmp_path):
        path = export(simulated_log, tmp_path / "trades.csv")
        assert read_csv(path)["penetrated"].isin([0, 1]).all()
        assert load_trades(path).equals(simulated_log)

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"n": [0], "eps": [1]}).to_csv(path, index=False)
        with pytest.raises(SchemaError):
            load_trades(path)

    def test_bad_penetration_flag(self, make_log, tmp_path):
        path = export(make_log(3), tmp_path / "trades.csv")
        frame = read_csv(path)
        frame["penetrated"] = [0, 2, 1]
        frame.to_csv(path, index=False)
        with pytest.raises(SchemaError):
            load_trades(path)

    def test_curve(self, tmp_path):
        x = np.arange(40.0)
        path = export(conditional_curve(x, x, 4), tmp_path / "curves" / "curve.csv")
        frame = load_curve(path)
        assert len(frame) == 4
        assert frame["count"].tolist() == [10, 10, 10, 10]
        with pytest.raises(SchemaError):
            load_curve(export(pd.DataFrame({"a": [1]}), tmp_path / "other.csv"))

    def test_unsupported_object(self, tmp_path):
        with pytest.raises(TypeError):
            export(42, tmp_path / "x.csv")

    def test_unreadable(self, tmp_path):
        with pytest.raises(IoError):
            read_csv(tmp_path / "absent.csv")

    def test_params_round_trip(self, tmp_path):
        params = DarParams(0.45, (0.5, 0.25, 0.25), mu_z=0.1)
        path = write_params(params, tmp_path / "dar.yaml", np.array([0.2, 0.15, 0.1]), {"mse": 0.8})
        assert load_params(path) == params

    def test_params_schema(self, tmp_path):
        path = tmp_path / "dar.yaml"
        path.write_text("p: 3\n")
        with pytest.raises(SchemaError):
            load_params(path)


def quote(t, bid, ask, bid_volume=300, ask_volume=200, day=1):
    return {
        "timestamp": t, "event": "quote", "bid": bid, "ask": ask,
        "bid_volume": bid_volume, "ask_volume": ask_volume,
        "bid_2nd": bid - 1, "ask_2nd": ask + 1, "day": day,
    }


def trade(t, sign, shares, day=1):
    return {"timestamp": t, "event": "trade", "sign": sign, "price": np.nan, "shares": shares, "day": day}


def events(rows):
    frame = pd.DataFrame(rows)
    for column in ("sign", "price", "shares", "bid", "ask", "bid_volume", "ask_volume", "bid_2nd", "ask_2nd"):
        if column not in frame:
            frame[column] = np.nan
    return frame


class TestIngest:
    rows = [
        trade(0, 1, 10),
        quote(0, 99, 101),
        trade(1, 1, 200),
        quote(1, 99, 102),
        quote(2, 100, 102),
        trade(3, -1, 50),
        trade(3, -1, 50),
        quote(4, 100, 102),
    ]

    def test_trade_rows(self):
        log = ingest(events(self.rows), tick_size=1.0, p=0)
        assert len(log) == 2
        np.testing.assert_array_equal(log["eps"], [1, -1])
        np.testing.assert_array_equal(log["v_mo"], [200, 100])
        np.testing.assert_array_equal(log["v_opp_best"], [200, 300])
        np.testing.assert_array_equal(log["penetrated"], [True, False])
        np.testing.assert_allclose(log["p_log"], np.log([100.0, 101.0]))
        np.testing.assert_allclose(log["r_mech"], [np.log(100.5 / 100.0), 0.0])
        np.testing.assert_allclose(log["r_quote"], [np.log(101.0 / 100.5), 0.0])
        np.testing.assert_allclose(log["r"], log["r_mech"] + log["r_quote"])
        np.testing.assert_allclose(log["gap_ask"], np.log([102.0 / 101.0, 103.0 / 102.0]))
        np.testing.assert_allclose(log["t"], [1.0, 3.0])
        assert np.all(np.isnan(log["eps_hat_pub"])) and np.all(np.isnan(log["eps_hat_priv"]))

    def test_merge_executions(self):
        merged = merge_executions(events(self.rows))
        assert len(merged) == len(self.rows) - 1
        assert merged.loc[merged["event"] == "trade", "shares"].tolist() == [10, 200, 100]

    def test_public_forecast_restarts_each_day(self):
        rows = [quote(0, 99, 101, day=1)]
        rows += [trade(t, s, 10, day=1) for t, s in ((1, 1), (2, -1), (3, 1))]
        rows += [quote(4, 99, 101, day=2)]
        rows += [trade(t, s, 10, day=2) for t, s in ((5, -1), (6, -1), (7, 1))]
        log = ingest(events(rows), params=DarParams(0.5))
        pub = log["eps_hat_pub"]
        assert np.isnan(pub[0]) and np.isnan(pub[3])
        np.testing.assert_allclose(pub[[1, 2, 4, 5]], [0.5, -0.5, -0.5, -0.5])
        np.testing.assert_array_equal(log["day"], [1, 1, 1, 2, 2, 2])

    def test_default_order_on_a_short_log(self):
        log = ingest(events([quote(0, 99, 101), trade(1, 1, 200), quote(2, 99, 102)]))
        assert len(log) == 1
        assert bool(log["penetrated"][0])
        assert np.isnan(log["eps_hat_pub"][0]) and np.isnan(log["x"][0])

    def test_too_few_trades_for_the_order(self):
        rng = np.random.default_rng(3)
        rows = [quote(0, 99, 101)]
        for t in range(1, 301):
            rows += [trade(2 * t - 1, int(rng.choice([-1, 1])), 10), quote(2 * t, 99, 101)]
        log = ingest(events(rows), p=30)
        assert len(log) == 300
        assert np.all(np.isnan(log["eps_hat_pub"]))
        fitted = ingest(events(rows), p=2)
        assert np.all(np.isfinite(fitted["eps_hat_pub"][2:]))

    def test_unordered(self):
        with pytest.raises(UnorderedTimestamps):
            ingest(events([quote(2, 99, 101), trade(1, 1, 10)]), p=0)

    def test_schema(self):
        with pytest.raises(SchemaError):
            ingest(pd.DataFrame({"timestamp": [0]}), p=0)
        with pytest.raises(SchemaError):
            ingest(events([quote(0, 99, 101), trade(1, 0, 10)]), p=0)
        bad = events([quote(0, 99, 101)])
        bad.loc[0, "event"] = "cancel"
        with pytest.raises(SchemaError):
            ingest(bad, p=0)

    def test_export_then_ingest_from_file(self, tmp_path):
        path = tmp_path / "events.csv"
        events(self.rows).to_csv(path, index=False)
        log = ingest(path, p=0)
        out = export(log, tmp_path / "trades.csv")
        assert load_trades(out).equals(log)


class TestManifestAndBatch:
    def test_hash_ignores_seed(self):
        a = ReducedConfig(seed=1)
        assert config_hash(a) == config_hash(ReducedConfig(seed=2))
        assert config_hash(a) != config_hash(ReducedConfig(impact=0.02))

    def test_manifest_round_trip(self, tmp_path):
        manifest = RunManifest.start(ReducedConfig(seed=5), "reduced")
        manifest.outputs.append("reduced.csv")
        path = manifest.write(tmp_path)
        assert path.name == MANIFEST_NAME
        assert RunManifest.read(path) == manifest
        with pytest.raises(IoError):
            RunManifest.read(tmp_path / "absent.yaml")

    def test_execute_reduced(self, tmp_path):
        manifest = execute(ReducedConfig(n_trades=500, seed=3), tmp_path)
        assert manifest.model == "reduced" and manifest.seed == 3
        assert (tmp_path / REDUCED_FILE).exists()
        assert RunManifest.read(tmp_path / MANIFEST_NAME).config_hash == manifest.config_hash

    def test_execute_full(self, config_factory, tmp_path):
        manifest = execute(config_factory(n_trades=50), tmp_path)
        assert manifest.model == "full"
        assert len(load_trades(tmp_path / TRADES_FILE)) == 50

    def write_configs(self, directory, names):
        paths = []
        for i, name in enumerate(names):
            path = directory / f"{name}.cfg"
            path.write_text(f"model = reduced\nn_trades = 300\nseed = {i}\n")
            paths.append(path)
        return paths

    @pytest.mark.parametrize("threads", [1, 2])
    def test_batch(self, tmp_path, threads):
        paths = self.write_configs(tmp_path, ["a", "b"])
        manifests = run_batch(paths, tmp_path / "out", threads)
        assert [m.seed for m in manifests] == [0, 1]
        for name in ("a", "b"):
            assert (tmp_path / "out" / name / REDUCED_FILE).exists()

    def test_batch_rejects_bad_file_before_running(self, tmp_path):
        paths = self.write_configs(tmp_path, ["good"])
        bad = tmp_path / "bad.cfg"
        bad.write_text("model = reduced\nspeed = 3\n")
        with pytest.raises(ValidationError):
            run_batch(paths + [bad], tmp_path / "out", 1)
        assert not (tmp_path / "out").exists()

    def test_batch_needs_distinct_names(self, tmp_path):
        (tmp_path / "x").mkdir()
        paths = self.write_configs(tmp_path, ["same"]) + self.write_configs(tmp_path / "x", ["same"])
        with pytest.raises(ValueError):
            run_batch(paths, tmp_path / "out")
