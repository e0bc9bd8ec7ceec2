"""Run configuration and the derived constants of the problem-dependent policy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from src.config.constants import (
    ALGORITHMS,
    APPROX_BACKENDS,
    DEFAULT_C1,
    DEFAULT_C2,
    DEFAULT_EPS_LP,
    ESTIMATOR_BACKENDS,
    LP_MODES,
)
from src.utils.errors import ConfigError


@dataclass
class RunConfig:
    algorithm: str
    estimator_backend: str = "idealized"
    lp_mode: str = "exact"
    eps_lp: float = DEFAULT_EPS_LP
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    mw_eps_override: float | None = None
    seed: int = 0
    supply_ground_truth_params: bool = True
    approx_backend: str = "idealized"
    exact_bounds: bool = False
    record_rounds: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm '{self.algorithm}', expected one of {ALGORITHMS}")
        if self.estimator_backend not in ESTIMATOR_BACKENDS:
            raise ConfigError(f"unknown estimator backend '{self.estimator_backend}'")
        if self.lp_mode not in LP_MODES:
            raise ConfigError(f"unknown lp_mode '{self.lp_mode}'")
        if self.approx_backend not in APPROX_BACKENDS:
            raise ConfigError(f"unknown approx_backend '{self.approx_backend}'")
        if self.eps_lp <= 0:
            raise ConfigError("eps_lp must be positive")
        if self.c1 < 1 or self.c2 < 1:
            raise ConfigError("c1 and c2 must be >= 1")
        if self.mw_eps_override is not None and self.mw_eps_override <= 0:
            raise ConfigError("mw_eps_override must be positive")
        if self.is_quantum and self.estimator_backend == "classical":
            raise ConfigError(f"{self.algorithm} needs a quantum estimator backend")
        if self.algorithm == "alg2-quantum" and self.estimator_backend == "ae-analytic":
            raise ConfigError("the problem-dependent policy needs the idealized backend for cost vectors")

    @property
    def is_quantum(self) -> bool:
        return self.algorithm.endswith("-quantum")

    @property
    def is_problem_dependent(self) -> bool:
        return self.algorithm.startswith("alg2")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Alg2Constants:
    theta: float
    eps_phase2: float
    delta_qmc: float

    @classmethod
    def compute(cls, sigma, chi, delta, m, d, b, T) -> "Alg2Constants":
        """θ, ε and δ_QMC from (σ, χ, δ, m, d, b, T)."""
        gap = min(chi, delta)
        theta = min(
            min(1.0, sigma**2) * gap / (12.0 * min(m**2, d**2)),
            (2.0 + 1.0 / b) ** -2 * delta / 5.0,
        )
        eps_phase2 = min(1.0, sigma) * gap * b / (5.0 * d**1.5)
        return cls(theta=theta, eps_phase2=eps_phase2, delta_qmc=d / T**3)

    @classmethod
    def from_ground_truth(cls, gt) -> "Alg2Constants":
        return cls.compute(gt.sigma, gt.chi, gt.delta, gt.m, gt.d, gt.b, gt.T)


def eps_lp_bound(gt, constants: Alg2Constants | None = None) -> float:
    """Largest LP accuracy the regret guarantee of the quantum problem-dependent policy allows."""
    constants = constants or Alg2Constants.from_ground_truth(gt)
    log_sq = math.log(gt.T) ** 2
    gap = min(gt.chi, gt.delta)
    return min(
        gt.sigma * gt.chi * log_sq / (40.0 * min(gt.m**1.5, gt.d**1.5)),
        2.0 * gt.b * constants.theta * gap * log_sq / 405.0,
        gt.delta / 4.0,
    )


def phase1_sample_threshold(gt, c1: float, eps_lp: float, constants: Alg2Constants | None = None) -> float:
    """Per-arm QMC sample size after which identification is guaranteed (inf when eps_lp >= δ/2)."""
    constants = constants or Alg2Constants.from_ground_truth(gt)
    margin = gt.delta / 2.0 - eps_lp
    if margin <= 0:
        return math.inf
    return (2.0 + 1.0 / gt.b) * c1 * math.sqrt(gt.d) * math.log(gt.d / constants.delta_qmc) / margin


def alg1_qmc_bound(m: int, T: int, c1: float) -> float:
    """Upper bound on QMC executions of the quantum primal-dual policy over a horizon T."""
    return m * math.log2(T / (2.0 * m * c1 * math.log(T)) + 1.0) + m
