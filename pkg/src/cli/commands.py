"""Subcommand bodies. Each prints its report to stdout and returns the exit code."""

from __future__ import annotations

import json
import math
import os

import numpy as np

from src.algos.config import Alg2Constants, RunConfig, alg1_qmc_bound, eps_lp_bound, phase1_sample_threshold
from src.algos.dispatch import run_algorithm
from src.bench.generators import instance_from_source
from src.bench.metrics import build_record
from src.bench.sweep import run_sweep
from src.cli.config_schema import CliConfig
from src.config.constants import DEFAULT_EPS_LP
from src.lp.approx import feasible_sum_bound, scale_for_approx, solve_approx, unscale_solution
from src.lp.problem import LpProblem
from src.lp.simplex import solve_exact
from src.model.ground_truth import compute_ground_truth
from src.model.instance import BwkInstance
from src.utils.errors import ConfigError, LpError
from src.utils.file_io import atomic_write_json, read_json


def _fmt(values) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in values) + ")"


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _instance_at(config: CliConfig, T: int | None) -> BwkInstance:
    instance = instance_from_source(config.instance)
    if T is None or T == instance.T:
        return instance
    budget = config.instance.get("budget")
    return instance.with_horizon(T, None if budget is None else float(budget))


def cmd_inspect(config: CliConfig, T: int | None = None) -> int:
    """Prints the ground-truth quantities and the derived policy constants."""
    instance = _instance_at(config, T)
    gt = compute_ground_truth(instance)
    report = gt.to_dict()
    report["alg1_qmc_bound"] = alg1_qmc_bound(gt.m, gt.T, config.algorithms[0].get("c1", 1.0)) if gt.T > 1 else None

    lines = [
        f"m = {gt.m}   d = {gt.d}   T = {gt.T}   B = {gt.B:g}   b = {gt.b:.6g}",
        f"OPT_LP = {gt.opt_lp:.6g}",
        f"xi*    = {_fmt(gt.xi_star)}",
        f"eta*   = {_fmt(gt.eta_star)}",
        f"I* = {list(gt.I_star)}   J* = {list(gt.J_star)}   J' = {list(gt.J_prime)}",
        f"delta = {gt.delta}   sigma = {gt.sigma:.6g}   chi = {gt.chi}",
        f"nondegenerate = {str(gt.nondegenerate).lower()}",
    ]
    if gt.nondegenerate:
        constants = Alg2Constants.from_ground_truth(gt)
        c1 = float(config.algorithms[0].get("c1", 1.0))
        eps_lp = float(config.algorithms[0].get("eps_lp", DEFAULT_EPS_LP))
        report.update(
            theta=constants.theta,
            eps_phase2=constants.eps_phase2,
            delta_qmc=constants.delta_qmc,
            eps_lp_bound=eps_lp_bound(gt, constants),
            phase1_sample_threshold=_json_safe(phase1_sample_threshold(gt, c1, eps_lp, constants)),
        )
        lines += [
            f"theta = {constants.theta:.6g}   eps_phase2 = {constants.eps_phase2:.6g}",
            f"eps_LP bound = {report['eps_lp_bound']:.6g}",
        ]
    else:
        lines.append("theta / eps_phase2 / eps_LP bound: not defined for a degenerate instance")
    print("\n".join(lines))
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _run_config_for(config: CliConfig, algo: str | None, seed: int) -> RunConfig:
    entries = config.algorithms
    if algo is not None:
        entries = [e for e in entries if e.get("label", e["algorithm"]) == algo or e["algorithm"] == algo]
        if not entries:
            entries = [{**config.overrides, "algorithm": algo}]
    params = {k: v for k, v in entries[0].items() if k != "label"}
    params["seed"] = seed
    return RunConfig(**params)


def cmd_simulate(
    config: CliConfig,
    algo: str | None = None,
    T: int | None = None,
    seed: int | None = None,
    out_dir: str | None = None,
) -> int:
    """One replication; the trace goes to <out>/trace-<algo>-<seed>.json."""
    seed = config.seed if seed is None else seed
    cfg = _run_config_for(config, algo, seed)
    instance = _instance_at(config, T)
    gt = compute_ground_truth(instance)
    trace = run_algorithm(instance, cfg, gt)
    out_dir = out_dir or config.output_dir
    path = atomic_write_json(os.path.join(out_dir, f"trace-{cfg.algorithm}-{seed}.json"), trace.to_dict())
    record = build_record(trace, gt, replication=0)
    print(
        f"{cfg.algorithm} seed={seed} T={instance.T}: pseudo_regret={record['pseudo_regret']:.4f} "
        f"tau={trace.tau} qmc_queries={trace.qmc_queries} lp_solves={trace.lp_solves} lp_reuses={trace.lp_reuses} -> {path}"
    )
    return 0


def cmd_sweep(config: CliConfig, dry_run: bool = False, out_dir: str | None = None, threads: int | None = None) -> int:
    spec = config.to_experiment_spec()
    if not spec.t_grid:
        raise ConfigError("'t_grid' must not be empty for a sweep")
    if out_dir:
        spec.output_dir = out_dir
    if dry_run:
        for label, T, rep in spec.cells():
            print(f"{label}\tT={T}\treplication={rep}")
        print(f"{len(spec.cells())} cells, nothing written")
        return 0
    result = run_sweep(spec, threads=threads)
    print(f"runs:    {result.runs_path}")
    print(f"summary: {result.summary_path}")
    for algo, slope in result.slopes.items():
        shown = "n/a (fewer than 3 horizons with positive regret)" if math.isnan(slope) else f"{slope:.4f}"
        print(f"log-log slope of mean pseudo-regret [{algo}]: {shown}")
    return 0


def cmd_lp(path: str, mode: str = "exact", eps: float = 0.02) -> int:
    """Solves an LP file; approx runs the zero-sum reduction at scaled accuracy eps."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if mode not in ("exact", "approx"):
        raise ConfigError(f"unknown mode '{mode}'")
    if not os.path.exists(path):
        raise ConfigError(f"LP file not found: {path}")
    try:
        lp = LpProblem.from_dict(read_json(path))
    except (LpError, ValueError) as e:
        raise ConfigError(f"invalid LP file {path}: {e}") from e
    if mode == "exact":
        solution = solve_exact(lp)
    else:
        factor = feasible_sum_bound(lp)
        scaled, record = scale_for_approx(lp, factor)
        solution = unscale_solution(lp, solve_approx(scaled, eps), record)
    payload = solution.to_dict()
    payload["mode"] = mode
    if mode == "approx":
        payload["eps_scaled"] = eps
    print(json.dumps(payload, indent=2, sort_keys=True, default=lambda v: float(v) if isinstance(v, np.floating) else str(v)))
    return 0
