import time
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Sequence, Union

from loguru import logger

from alob.config import settings
from alob.io.config_file import RunConfig, parse_config
from alob.io.csv_io import export
from alob.io.manifest import RunManifest
from alob.sim.engine import run
from alob.sim.models import SimConfig
from alob.sim.reduced import run_reduced

TRADES_FILE = "trades.csv"
REDUCED_FILE = "reduced.csv"


def execute(config: RunConfig, out_dir: Union[str, Path]) -> RunManifest:
    """Run one configuration and write its output file and manifest into ``out_dir``."""
    out_dir = Path(out_dir)
    started = time.perf_counter()
    if isinstance(config, SimConfig):
        manifest = RunManifest.start(config, "full")
        path = export(run(config), out_dir / TRADES_FILE)
    else:
        manifest = RunManifest.start(config, "reduced")
        path = export(run_reduced(config).to_frame(), out_dir / REDUCED_FILE)
    manifest.outputs.append(str(path))
    manifest.wall_clock = round(time.perf_counter() - started, 3)
    manifest.write(out_dir)
    return manifest


def _execute_file(job) -> RunManifest:
    path, out_dir = job
    return execute(parse_config(path), out_dir)


def run_batch(
    config_paths: Sequence[Union[str, Path]],
    out_dir: Union[str, Path],
    threads: Optional[int] = None,
) -> List[RunManifest]:
    """Run every configuration file into ``out_dir/<file stem>`` on a worker pool."""
    paths = [Path(p) for p in config_paths]
    stems = [p.stem for p in paths]
    if len(set(stems)) != len(stems):
        raise ValueError("configuration files must have distinct names")
    # parse up front so a bad file fails before any worker starts
    for path in paths:
        parse_config(path)
    jobs = [(path, Path(out_dir) / path.stem) for path in paths]
    workers = max(1, min(threads or settings.threads, len(jobs)))
    logger.info(f"Running {len(jobs)} configurations on {workers} workers")
    if workers == 1:
        return [_execute_file(job) for job in jobs]
    with Pool(processes=workers) as pool:
        return pool.map(_execute_file, jobs)
