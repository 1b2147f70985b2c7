import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from alob.analytics.conditional import book_conditionals, impact_decomposition, mechanical_impact_approx, penetration_stats
from alob.analytics.efficiency import fit_impact, inefficiency_scan, propagator
from alob.analytics.signature import default_lags, signature_plot, signature_slope
from alob.config import settings
from alob.errors import AlobError, IoError, ValidationError
from alob.io.batch import execute, run_batch
from alob.io.config_file import __doc__ as CONFIG_HELP
from alob.io.config_file import parse_config
from alob.io.csv_io import export, load_params, load_trades, read_csv, write_params
from alob.io.ingest import ingest
from alob.sim.models import ReducedConfig, SimConfig
from alob.stats.autocorr import sample_autocorr
from alob.stats.dar_fit import smooth_and_project, yule_walker_solve
from alob.stats.predictors import dar_predictions, mse

ANALYSES = ("signature", "conditional", "penetration", "inefficiency", "propagator")


class Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_run_config(path: str, expected: type, seed: Optional[int]):
    config = parse_config(path)
    if not isinstance(config, expected):
        other = "reduced" if expected is SimConfig else "simulate"
        raise ValidationError(f"{path} describes a {type(config).__name__}; use '{other}'", "model")
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


def cmd_simulate(args) -> None:
    manifest = execute(_load_run_config(args.config, SimConfig, args.seed), args.out)
    logger.info(f"Run {manifest.config_hash[:12]} seed {manifest.seed} done in {manifest.wall_clock}s")


def cmd_reduced(args) -> None:
    execute(_load_run_config(args.config, ReducedConfig, args.seed), args.out)


def cmd_fit_dar(args) -> None:
    eps = load_trades(args.trades)["eps"]
    raw = yule_walker_solve(sample_autocorr(eps, args.p), args.p)
    params = smooth_and_project(raw, args.window)
    quality = mse(eps, dar_predictions(params, eps, 0))
    write_params(
        params,
        args.out,
        raw,
        {"mse": quality.mse, "mse_se": quality.se, "null_bound": quality.null_bound},
    )
    logger.info(f"DAR({args.p}): chi={params.chi:.4f}, MSE {quality.mse:.4f} (null {quality.null_bound:.4f})")


def _fitted_params(args, eps):
    if args.params:
        return load_params(args.params)
    raw = yule_walker_solve(sample_autocorr(eps, args.p), args.p)
    return smooth_and_project(raw)


def cmd_analyze(args) -> None:
    out = Path(args.out)
    k = args.bins
    if args.which == "signature":
        prices = read_csv(args.trades)["p_log"].to_numpy()
        lags = default_lags(min(args.max_lag, max(1, prices.size // 10 - 1)))
        plot = signature_plot(prices, lags, settings.analytics.batches)
        export(plot, out / "signature.csv")
        slope = signature_slope(plot)
        logger.info(f"Signature log-log slope {slope.slope:+.4f} +- {slope.stderr:.4f}")
        return

    log = load_trades(args.trades)
    if args.which == "conditional":
        for name, curve in impact_decomposition(log, k).curves().items():
            export(curve, out / f"impact_{name}.csv")
        for name, curve in book_conditionals(log, k).curves().items():
            export(curve, out / f"book_{name}.csv")
        export(mechanical_impact_approx(log, k), out / "mechanical_approx.csv")
    elif args.which == "penetration":
        for name, curve in penetration_stats(log, k).curves().items():
            export(curve, out / f"penetration_{name}.csv")
    elif args.which == "inefficiency":
        params = _fitted_params(args, log["eps"])
        scan = inefficiency_scan(log, args.horizons, params, k)
        rows = []
        for h in scan.horizons:
            for b in range(h.bin_lo.size):
                rows.append(
                    [h.s, h.bin_lo[b], h.bin_hi[b], h.mean_pos[b], h.se_pos[b], h.mean_neg[b], h.se_neg[b], int(h.violations[b])]
                )
        frame = pd.DataFrame(rows, columns=["s", "bin_lo", "bin_hi", "mean_pos", "se_pos", "mean_neg", "se_neg", "violation"])
        export(frame, out / "inefficiency.csv")
        logger.info(f"Minimal efficient horizon: {scan.min_s}, efficiency time: {scan.efficiency_time}")
    elif args.which == "propagator":
        params = _fitted_params(args, log["eps"])
        impact = args.impact
        if impact is None:
            eps_hat = dar_predictions(params, log["eps"], 0)
            impact = fit_impact(log["eps"], eps_hat, log["r"]).impact
            logger.info(f"Fitted impact scale A={impact:.6g}")
        g = propagator(params, impact, args.max_lag)
        export(pd.DataFrame({"lag": np.arange(1, g.size + 1), "g": g}), out / "propagator.csv")


def cmd_ingest(args) -> None:
    export(ingest(args.raw, args.tick_size, args.p), args.out)


def cmd_batch(args) -> None:
    manifests = run_batch(args.configs, args.out, args.threads)
    logger.info(f"Batch finished: {len(manifests)} runs")


def _horizons(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"horizons must be comma-separated integers: {text}") from e


def build_parser() -> Parser:
    parser = Parser(prog="alob", description="Adaptive limit order book simulator and analytics")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser(
        "simulate",
        help="run the full book simulation",
        description=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("config")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "reduced",
        help="run the reduced efficient-price model",
        description=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduced)

    p = sub.add_parser("fit-dar", help="fit DAR(p) to the signs of a trade log")
    p.add_argument("trades")
    p.add_argument("--p", type=int, default=settings.analytics.dar_order)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_dar)

    p = sub.add_parser("analyze", help="compute curves from a trade log")
    p.add_argument("trades")
    p.add_argument("which", choices=ANALYSES)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=settings.analytics.bins)
    p.add_argument("--max-lag", type=int, default=settings.analytics.max_lag)
    p.add_argument("--params", help="DAR parameters written by fit-dar")
    p.add_argument("--p", type=int, default=settings.analytics.dar_order)
    p.add_argument("--horizons", type=_horizons, default=[0, 1, 2, 5, 10])
    p.add_argument("--impact", type=float)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("ingest", help="convert an event log to a trade log")
    p.add_argument("raw")
    p.add_argument("--out", required=True)
    p.add_argument("--tick-size", type=float, default=settings.ingest.tick_size)
    p.add_argument("--p", type=int, default=settings.ingest.dar_order)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("batch", help="run many configuration files in parallel")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if args.verbose else settings.log.level)
    try:
        args.func(args)
    except (IoError, OSError) as e:
        logger.error(str(e))
        return 2
    except (AlobError, ValueError) as e:
        logger.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
