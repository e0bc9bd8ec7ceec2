"""T-sweeps: seeded replications run concurrently, merged deterministically, written as CSV."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import polars as pl

from src.algos.config import RunConfig
from src.algos.dispatch import run_algorithm
from src.bench.generators import instance_from_source
from src.bench.metrics import build_record, failed_record, fit_loglog_slope
from src.config.constants import DEFAULT_OUTPUT_DIR, RUNS_COLUMNS, RUNS_FILE, SUMMARY_FILE
from src.config.settings import get_thread_count
from src.model.ground_truth import compute_ground_truth
from src.utils.errors import BwkError, ConfigError
from src.utils.file_io import atomic_write_csv
from src.utils.logging import log_system_event
from src.utils.safe_ops import safe_run

NUMERIC_SUMMARY_COLUMNS = ["pseudo_regret", "realized_regret", "tau", "phase1_rounds", "qmc_query_total"]


@dataclass
class ExperimentSpec:
    name: str
    instance: dict
    t_grid: list
    algorithms: list
    replications: int = 1
    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR

    def __post_init__(self):
        if not self.t_grid:
            raise ConfigError("t_grid must not be empty")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        self.t_grid = [int(t) for t in self.t_grid]

    @property
    def labels(self) -> list[str]:
        return [entry.get("label", entry["algorithm"]) for entry in self.algorithms]

    def run_configs(self, seed: int) -> list[tuple[str, RunConfig]]:
        configs = []
        for entry in self.algorithms:
            params = {k: v for k, v in entry.items() if k != "label"}
            params.update(seed=seed, record_rounds=False)
            configs.append((entry.get("label", entry["algorithm"]), RunConfig(**params)))
        return configs

    def cells(self) -> list[tuple[str, int, int]]:
        """(label, T, replication) in the order rows are written."""
        return sorted((label, T, rep) for label in self.labels for T in self.t_grid for rep in range(self.replications))


@dataclass
class SweepResult:
    runs: pd.DataFrame
    summary: pd.DataFrame
    slopes: dict = field(default_factory=dict)
    runs_path: str = ""
    summary_path: str = ""


def replication_seed(base_seed: int, replication: int) -> int:
    """Seed shared by every algorithm in one replication."""
    return int(np.random.SeedSequence([int(base_seed), int(replication)]).generate_state(1)[0])


def summarize_runs(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard error per (algo, T) over successful runs."""
    ok = runs[runs["status"] == "ok"][["algo", "T"] + NUMERIC_SUMMARY_COLUMNS].astype(
        {column: float for column in NUMERIC_SUMMARY_COLUMNS}
    )
    ok = ok.astype({"T": int, "algo": str})
    lazy_df = pl.from_pandas(ok).lazy()
    summary = (
        lazy_df.group_by(["algo", "T"])
        .agg(
            [
                pl.col("pseudo_regret").count().alias("runs"),
                pl.col("pseudo_regret").mean().alias("pseudo_regret_mean"),
                (pl.col("pseudo_regret").std() / pl.col("pseudo_regret").count().sqrt())
                .fill_null(0.0)
                .alias("pseudo_regret_se"),
                pl.col("realized_regret").mean().alias("realized_regret_mean"),
                (pl.col("realized_regret").std() / pl.col("realized_regret").count().sqrt())
                .fill_null(0.0)
                .alias("realized_regret_se"),
                pl.col("tau").mean().alias("tau_mean"),
                pl.col("phase1_rounds").mean().alias("phase1_rounds_mean"),
                pl.col("qmc_query_total").mean().alias("qmc_query_mean"),
            ]
        )
        .sort(["algo", "T"])
        .collect()
        .to_pandas()
    )
    return summary


def regret_slopes(summary: pd.DataFrame) -> dict:
    """Fitted log-log slope of mean pseudo-regret against T, per algorithm; nan when too few horizons."""
    slopes = {}
    for algo, group in summary.groupby("algo", sort=True):
        try:
            slopes[algo] = fit_loglog_slope(group["T"].tolist(), group["pseudo_regret_mean"].tolist())
        except BwkError:
            slopes[algo] = math.nan
    return slopes


def run_sweep(spec: ExperimentSpec, threads: int | None = None, write: bool = True) -> SweepResult:
    """Runs every (algorithm, T, replication) cell and writes runs.csv and summary.csv.

    A failing cell becomes a row with status "failed: ..." instead of
    aborting the sweep. Rows are sorted by (algo, T, replication) so the
    output does not depend on thread scheduling.
    """
    base = instance_from_source(spec.instance)
    fixed_budget = spec.instance.get("budget")
    horizons = {}
    for T in spec.t_grid:
        instance = base.with_horizon(T, None if fixed_budget is None else float(fixed_budget))
        horizons[T] = (instance, compute_ground_truth(instance))

    jobs = []
    for rep in range(spec.replications):
        seed = replication_seed(spec.seed, rep)
        for label, cfg in spec.run_configs(seed):
            for T in spec.t_grid:
                jobs.append((label, T, rep, cfg))

    def run_cell(job):
        label, T, rep, cfg = job
        instance, gt = horizons[T]

        def simulate():
            trace = run_algorithm(instance, cfg, gt)
            trace.algo = label
            return build_record(trace, gt, rep)

        details = {"algo": label, "T": T, "replication": rep, "seed": cfg.seed}
        record, error_text = safe_run(simulate, context="sweep", details=details)
        if error_text is not None:
            log_system_event("SWEEP_RUN_FAILED", {**details, "error": error_text})
            return failed_record(label, T, rep, cfg.seed, error_text)
        return record

    workers = max(1, threads if threads is not None else get_thread_count())
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(run_cell, jobs))
    records.sort(key=lambda r: (r["algo"], r["T"], r["replication"]))

    runs = pd.DataFrame(records, columns=RUNS_COLUMNS)
    summary = summarize_runs(runs)
    result = SweepResult(runs=runs, summary=summary, slopes=regret_slopes(summary))
    if write:
        os.makedirs(spec.output_dir, exist_ok=True)
        result.runs_path = atomic_write_csv(os.path.join(spec.output_dir, RUNS_FILE), runs)
        result.summary_path = atomic_write_csv(os.path.join(spec.output_dir, SUMMARY_FILE), summary)
    failed = int((runs["status"] != "ok").sum())
    log_system_event(
        "SWEEP_COMPLETE",
        {"name": spec.name, "runs": len(runs), "failed": failed, "slopes": {k: _finite(v) for k, v in result.slopes.items()}},
    )
    return result


def _finite(value: float) -> float | None:
    return None if math.isnan(value) else value
