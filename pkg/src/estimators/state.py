"""Per-arm confidence state shared by all policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from src.config.constants import DEFAULT_C1
from src.estimators.hoeffding import hoeffding_radius
from src.estimators.quantum import EstimatorBudget
from src.utils.errors import EstimatorError

REWARD_QMC = "reward-qmc"
REWARD_CLASSICAL = "reward-classical"
COST_CLASSICAL = "cost-classical"


@dataclass
class ConfidenceState:
    """Estimates, radii and counters for m arms and d resources.

    Resource 0 (time) is consumed deterministically at rate ``time_cost``;
    its bounds are pinned to that value with zero radius. Reward bounds
    are projected to [0, 1]; cost bounds are not.
    """

    m: int
    d: int
    T: int
    time_cost: float
    budget: EstimatorBudget = field(default_factory=EstimatorBudget)
    r_hat: np.ndarray = None
    rad_r: np.ndarray = None
    n_qmc_r: np.ndarray = None
    c_hat: np.ndarray = None
    rad_c: np.ndarray = None
    n_pulls: np.ndarray = None
    pending_queries: np.ndarray = None
    reward_sum: np.ndarray = None
    cost_sum: np.ndarray = None
    frozen: bool = False

    def __post_init__(self):
        m, d = self.m, self.d
        self.r_hat = np.zeros(m) if self.r_hat is None else np.asarray(self.r_hat, dtype=float)
        self.rad_r = np.full(m, np.inf) if self.rad_r is None else np.asarray(self.rad_r, dtype=float)
        self.n_qmc_r = np.zeros(m, dtype=int) if self.n_qmc_r is None else self.n_qmc_r
        self.c_hat = np.zeros((d, m)) if self.c_hat is None else np.asarray(self.c_hat, dtype=float)
        self.rad_c = np.full((d, m), np.inf) if self.rad_c is None else np.asarray(self.rad_c, dtype=float)
        self.n_pulls = np.zeros(m, dtype=int) if self.n_pulls is None else self.n_pulls
        self.pending_queries = np.zeros(m, dtype=int) if self.pending_queries is None else self.pending_queries
        self.reward_sum = np.zeros(m) if self.reward_sum is None else self.reward_sum
        self.cost_sum = np.zeros((d, m)) if self.cost_sum is None else self.cost_sum
        self.c_hat[0] = self.time_cost
        self.rad_c[0] = 0.0

    @classmethod
    def exact(cls, r, C, T: int, budget: EstimatorBudget | None = None) -> "ConfidenceState":
        """Estimates equal to the true means with zero radii; updates are ignored."""
        C = np.asarray(C, dtype=float)
        r = np.asarray(r, dtype=float)
        return cls(
            m=r.size,
            d=C.shape[0],
            T=T,
            time_cost=float(C[0, 0]),
            budget=budget or EstimatorBudget(),
            r_hat=r.copy(),
            rad_r=np.zeros(r.size),
            c_hat=C.copy(),
            rad_c=np.zeros_like(C),
            frozen=True,
        )

    @property
    def r_upper(self) -> np.ndarray:
        return np.clip(self.r_hat + self.rad_r, 0.0, 1.0)

    @property
    def r_lower(self) -> np.ndarray:
        return np.clip(self.r_hat - self.rad_r, 0.0, 1.0)

    @property
    def c_upper(self) -> np.ndarray:
        return self.c_hat + self.rad_c

    @property
    def c_lower(self) -> np.ndarray:
        return self.c_hat - self.rad_c

    def cost_radius(self, arm: int) -> float:
        """Largest cost radius of an arm over the estimated rows."""
        return float(self.rad_c[1:, arm].max()) if self.d > 1 else 0.0

    def record_pull(self, arm: int, reward: float, cost: np.ndarray) -> None:
        self.n_pulls[arm] += 1
        self.pending_queries[arm] += 1
        self.reward_sum[arm] += reward
        self.cost_sum[:, arm] += cost
        self.budget.record_classical(1)

    def reset_classical(self) -> None:
        """Forgets pooled samples (after a quantum phase measured them)."""
        self.n_pulls[:] = 0
        self.reward_sum[:] = 0.0
        self.cost_sum[:] = 0.0

    def offer_reward(self, arm: int, estimate: float, radius: float) -> bool:
        """Adopts the estimate unless it would loosen the current radius."""
        if self.frozen or radius > self.rad_r[arm]:
            return False
        self.r_hat[arm] = estimate
        self.rad_r[arm] = radius
        return True

    def offer_cost(self, arm: int, estimate: np.ndarray, radius) -> bool:
        if self.frozen:
            return False
        radius = np.broadcast_to(np.asarray(radius, dtype=float), (self.d,)).copy()
        radius[0] = 0.0
        if np.any(radius[1:] > self.rad_c[1:, arm]):
            return False
        self.c_hat[1:, arm] = np.asarray(estimate, dtype=float)[1:]
        self.rad_c[1:, arm] = radius[1:]
        return True


def update_bounds_alg1(
    state: ConfidenceState,
    kind: str,
    arm: int,
    estimate: float | None = None,
    c1: float = DEFAULT_C1,
) -> ConfidenceState:
    """Refreshes one arm's bounds after a QMC batch or a classical pull.

    reward-qmc: radius 2·c1·ln T / n_qmc_r around ``estimate``.
    reward-classical / cost-classical: Hoeffding radius sqrt(3 ln T / n_pulls).
    """
    if kind == REWARD_QMC:
        if state.n_qmc_r[arm] <= 0:
            raise EstimatorError("no QMC queries recorded for this arm")
        if estimate is None:
            raise EstimatorError("reward-qmc update needs the QMC estimate")
        radius = 2.0 * c1 * math.log(state.T) / state.n_qmc_r[arm]
        state.offer_reward(arm, estimate, radius)
        return state
    if state.n_pulls[arm] <= 0:
        raise EstimatorError("no samples")
    radius = hoeffding_radius(state.n_pulls[arm], state.T)
    if kind == REWARD_CLASSICAL:
        state.offer_reward(arm, state.reward_sum[arm] / state.n_pulls[arm], radius)
    elif kind == COST_CLASSICAL:
        state.offer_cost(arm, state.cost_sum[:, arm] / state.n_pulls[arm], radius)
    else:
        raise EstimatorError(f"unknown bound update '{kind}'")
    return state
