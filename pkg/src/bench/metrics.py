"""Regret records, the regret decomposition and growth-rate fits."""

from __future__ import annotations

import math

import numpy as np

from src.algos.trace import RunTrace
from src.config.constants import RUNS_COLUMNS
from src.model.ground_truth import GroundTruth
from src.utils.errors import BwkError

MIN_SLOPE_POINTS = 3


def regret_decomposition(trace: RunTrace, gt: GroundTruth) -> tuple[float, float]:
    """(Σ_{i∈I'} n_i Δ_i, B^(τ)·η*).

    The leftover term prices the realized remaining budget. The two terms
    bound the pseudo-regret in expectation; on a single run they differ
    from it by η*·(realized − expected consumption), which is zero when
    every cost is deterministic.
    """
    pulls = np.asarray(trace.pulls, dtype=float)
    suboptimal_arms = list(gt.I_prime)
    suboptimal = float(pulls[suboptimal_arms] @ gt.reduced_costs()[suboptimal_arms]) if suboptimal_arms else 0.0
    leftover = float(np.asarray(trace.remaining_budget, dtype=float) @ gt.eta_star)
    return suboptimal, leftover


def consumption_gap(trace: RunTrace, gt: GroundTruth) -> float:
    """η*·(realized − expected consumption); the per-run slack of the decomposition."""
    realized = np.full(gt.d, float(gt.B)) - np.asarray(trace.remaining_budget, dtype=float)
    return float(gt.eta_star @ (realized - np.asarray(trace.expected_consumption, dtype=float)))


def identification_correct(trace: RunTrace, gt: GroundTruth) -> bool | None:
    if trace.identified_arms is None:
        return None
    return sorted(trace.identified_arms) == list(gt.I_star) and sorted(trace.identified_rows) == list(gt.J_prime)


def fit_loglog_slope(horizons, values) -> float:
    """Least-squares slope of log(value) against log(T).

    Nonpositive values are dropped before the fit.
    """
    points = [(math.log(t), math.log(v)) for t, v in zip(horizons, values) if t > 0 and v > 0]
    if len(points) < MIN_SLOPE_POINTS:
        raise BwkError(f"slope fit needs at least {MIN_SLOPE_POINTS} positive points, got {len(points)}")
    xs, ys = zip(*points)
    return float(np.polyfit(xs, ys, 1)[0])


def build_record(trace: RunTrace, gt: GroundTruth, replication: int) -> dict:
    """One runs.csv row."""
    suboptimal, leftover = regret_decomposition(trace, gt)
    correct = identification_correct(trace, gt)
    record = {
        "algo": trace.algo,
        "T": trace.T,
        "B": trace.B,
        "m": trace.m,
        "d": trace.d,
        "replication": replication,
        "seed": trace.seed,
        "status": "ok",
        "pseudo_regret": gt.opt_lp - trace.total_pseudo_reward,
        "realized_regret": gt.opt_lp - trace.total_realized_reward,
        "tau": trace.tau,
        "phase1_rounds": trace.phase1_rounds,
        "identification_correct": "" if correct is None else correct,
        "arm_pulls": ";".join(str(n) for n in trace.pulls),
        "qmc_query_total": trace.qmc_queries,
        "lp_solve_count": trace.lp_solves,
        "modeled_quantum_cost": trace.modeled_quantum_cost,
        "modeled_classical_cost": trace.modeled_classical_cost,
        "suboptimal_term": suboptimal,
        "leftover_term": leftover,
        "exhausted_rows": ";".join(str(j) for j in trace.exhausted_rows),
    }
    return {column: record[column] for column in RUNS_COLUMNS}


def failed_record(algo: str, T: int, replication: int, seed: int, error_text: str) -> dict:
    record = {column: "" for column in RUNS_COLUMNS}
    record.update({"algo": algo, "T": T, "replication": replication, "seed": seed, "status": f"failed: {error_text}"})
    return record
