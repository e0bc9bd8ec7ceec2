from __future__ import annotations

from src.algos.alg1 import run_alg1_classical, run_alg1_quantum
from src.algos.alg2 import run_alg2_classical, run_alg2_quantum
from src.algos.config import RunConfig
from src.algos.trace import RunTrace
from src.model.ground_truth import GroundTruth, compute_ground_truth
from src.model.instance import BwkInstance


def run_algorithm(instance: BwkInstance, cfg: RunConfig, ground_truth: GroundTruth | None = None) -> RunTrace:
    """Runs the policy named by ``cfg.algorithm`` on one seeded episode."""
    if cfg.algorithm == "alg1-quantum":
        return run_alg1_quantum(instance, cfg)
    if cfg.algorithm == "alg1-classical":
        return run_alg1_classical(instance, cfg)
    gt = ground_truth if ground_truth is not None else compute_ground_truth(instance)
    if cfg.algorithm == "alg2-quantum":
        return run_alg2_quantum(instance, cfg, gt)
    return run_alg2_classical(instance, cfg, gt)
