"""Problem-independent primal-dual policies (quantum and classical reward bounds)."""

from __future__ import annotations

import math

import numpy as np

from src.algos.config import RunConfig
from src.algos.trace import BanditEpisode, RunTrace
from src.estimators.quantum import EstimatorBudget, qmc_univariate
from src.estimators.state import (
    COST_CLASSICAL,
    REWARD_CLASSICAL,
    REWARD_QMC,
    ConfidenceState,
    update_bounds_alg1,
)
from src.model.instance import BwkInstance
from src.utils.safe_ops import safe_ratio


def mw_epsilon(instance: BwkInstance, cfg: RunConfig) -> float:
    """Weight-update rate: the override if set, else sqrt(ln d / B)."""
    if cfg.mw_eps_override is not None:
        return cfg.mw_eps_override
    return math.sqrt(math.log(instance.d) / instance.B)


def mw_update(v: np.ndarray, cost_lower: np.ndarray, eps: float) -> np.ndarray:
    """v_j ← v_j (1+ε)^{C^L_j} with the exponent clamped to [0, 1]."""
    return v * (1.0 + eps) ** np.clip(cost_lower, 0.0, 1.0)


def bang_per_buck_arm(r_upper: np.ndarray, c_lower: np.ndarray, v: np.ndarray) -> int:
    """argmax_i r^U_i / (C^L_{·,i} · v); zero denominators rank first, ties go to the lowest index."""
    denominators = np.clip(c_lower, 0.0, None).T @ v
    return int(np.argmax(safe_ratio(r_upper, denominators)))


def batch_size(T: int, c1: float, radius: float) -> int:
    return int(math.ceil(2.0 * c1 * math.log(T) / radius))


def _new_state(instance: BwkInstance, cfg: RunConfig) -> ConfidenceState:
    budget = EstimatorBudget(c1=cfg.c1, c2=cfg.c2)
    if cfg.exact_bounds:
        return ConfidenceState.exact(instance.mean_rewards, instance.mean_costs, instance.T, budget)
    return ConfidenceState(m=instance.m, d=instance.d, T=instance.T, time_cost=instance.b, budget=budget)


def _pull(episode: BanditEpisode, state: ConfidenceState, arm: int, classical_rewards: bool) -> None:
    reward, cost = episode.pull(arm)
    state.record_pull(arm, reward, cost)
    update_bounds_alg1(state, COST_CLASSICAL, arm)
    if classical_rewards:
        update_bounds_alg1(state, REWARD_CLASSICAL, arm)


class _RewardQmc:
    """Per-arm QMC bookkeeping: a batch of pulls closes once it reaches the current radius target."""

    def __init__(self, episode: BanditEpisode, state: ConfidenceState, cfg: RunConfig):
        self.episode = episode
        self.state = state
        self.cfg = cfg
        self.radius = np.ones(state.m)
        self.delta = min(0.5, 1.0 / episode.instance.T**2)

    def target(self, arm: int) -> int:
        return batch_size(self.episode.instance.T, self.cfg.c1, self.radius[arm])

    def ready(self, arm: int) -> bool:
        return self.state.pending_queries[arm] >= self.target(arm)

    def run(self, arm: int) -> None:
        episode, state = self.episode, self.state
        estimate, queries = qmc_univariate(
            episode.instance.mean_rewards[arm],
            eps=float(self.radius[arm]),
            delta=self.delta,
            backend=self.cfg.estimator_backend,
            rng=episode.rng,
            c1=self.cfg.c1,
        )
        state.n_qmc_r[arm] = queries
        state.budget.record_quantum(queries)
        update_bounds_alg1(state, REWARD_QMC, arm, estimate=estimate, c1=self.cfg.c1)
        episode.record_qmc(arm, queries, self.radius[arm], target="reward")
        state.pending_queries[arm] = 0
        self.radius[arm] /= 2.0


def _primal_dual_phase(episode: BanditEpisode, state: ConfidenceState, eps: float, qmc: _RewardQmc | None) -> None:
    v = np.ones(state.d)
    episode.event("phase2-start", mw_eps=eps)
    while not episode.should_stop():
        c_lower = state.c_lower
        arm = bang_per_buck_arm(state.r_upper, c_lower, v)
        _pull(episode, state, arm, classical_rewards=qmc is None)
        if qmc is not None and qmc.ready(arm):
            qmc.run(arm)
        v = mw_update(v, c_lower[:, arm], eps)
    episode.trace.final_weights = [float(w) for w in v]


def run_alg1_quantum(instance: BwkInstance, cfg: RunConfig) -> RunTrace:
    """Primal-dual policy whose reward bounds come from batched quantum mean estimation.

    Each arm is first pulled ceil(2·c1·ln T) times and estimated once;
    afterwards an arm's pulls accumulate until the next batch target
    (twice the previous one) and are then handed to QMC. Cost bounds are
    classical and refreshed on every pull.
    """
    episode = BanditEpisode(instance, cfg.algorithm, cfg.seed, cfg.record_rounds)
    state = _new_state(instance, cfg)
    qmc = _RewardQmc(episode, state, cfg)
    episode.event("phase1-start")
    for arm in range(instance.m):
        for _ in range(qmc.target(arm)):
            if episode.should_stop():
                episode.event("init-incomplete", arm=arm)
                episode.trace.phase1_rounds = episode.t
                return episode.finish()
            _pull(episode, state, arm, classical_rewards=False)
        qmc.run(arm)
    episode.trace.phase1_rounds = episode.t
    _primal_dual_phase(episode, state, mw_epsilon(instance, cfg), qmc)
    return episode.finish()


def run_alg1_classical(instance: BwkInstance, cfg: RunConfig) -> RunTrace:
    """PrimalDualBwK: one initial pull per arm, then Hoeffding bounds refreshed every pull."""
    episode = BanditEpisode(instance, cfg.algorithm, cfg.seed, cfg.record_rounds)
    state = _new_state(instance, cfg)
    episode.event("phase1-start")
    for arm in range(instance.m):
        if episode.should_stop():
            episode.event("init-incomplete", arm=arm)
            episode.trace.phase1_rounds = episode.t
            return episode.finish()
        _pull(episode, state, arm, classical_rewards=True)
    episode.trace.phase1_rounds = episode.t
    _primal_dual_phase(episode, state, mw_epsilon(instance, cfg), None)
    return episode.finish()
