"""Problem-dependent two-phase policies.

Phase I pulls every arm in doubling batches and uses three LP families to
decide which arms are optimal and which resources are slack. Phase II
plays the normalized solution of a residual LP over the identified arms,
re-solving only when the previous answer no longer holds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.algos.config import Alg2Constants, RunConfig, eps_lp_bound
from src.algos.trace import STOP_PHASE1_BUDGET, BanditEpisode, RunTrace
from src.config.constants import CLASSIFY_TOL
from src.estimators.hoeffding import hoeffding_radius
from src.estimators.quantum import EstimatorBudget, effective_samples, qmc_multivariate, qmc_univariate
from src.estimators.state import ConfidenceState
from src.lp.approx import solve_lp
from src.lp.cost_model import modeled_cost
from src.lp.families import (
    conservative_lp,
    optimistic_arm_removed_lp,
    optimistic_constraint_lp,
    residual_lp,
    residual_square_lp,
)
from src.lp.problem import LpProblem, LpSolution
from src.lp.simplex import VertexBasis, reoptimize, solve_exact, vertex_basis
from src.model.ground_truth import GroundTruth
from src.model.instance import BwkInstance
from src.utils.errors import ConfigError, DegenerateInstanceError
from src.utils.logging import log_system_event
from src.utils.safe_ops import safe_normalize

logger = logging.getLogger(__name__)

EQ6 = "eq6"
EQ7 = "eq7"

PHASE1_HOEFFDING_SCALE = 2.0
PHASE2_HOEFFDING_SCALE = 2.0


def phase2_condition(
    state: ConfidenceState,
    theta: float,
    eps_phase2: float,
    t: int,
    remaining: np.ndarray,
    support,
    rows=None,
) -> str:
    """Chooses the Phase II LP for round t.

    eq7 iff every identified arm has cost radius <= θ and the per-round
    remaining budget B/(T−t+1) lies in [b−ε, b+ε] on every checked row
    (all rows unless ``rows`` is given). The radius stands in for the
    unobservable distance between C^L and C.
    """
    if any(state.cost_radius(i) > theta for i in support):
        return EQ6
    ratio = np.asarray(remaining, dtype=float) / (state.T - t + 1)
    rows = range(state.d) if rows is None else list(rows)
    b = state.time_cost
    for j in rows:
        if ratio[j] < b - eps_phase2 or ratio[j] > b + eps_phase2:
            return EQ6
    return EQ7


class _LpRecorder:
    """Solves LPs for one episode and books counts, events and modeled cost."""

    def __init__(self, episode: BanditEpisode, cfg: RunConfig):
        self.episode = episode
        self.cfg = cfg

    def _book(self, n: int, k: int, eps_scaled: float) -> None:
        trace = self.episode.trace
        trace.modeled_quantum_cost += modeled_cost("quantum", n, k, eps_scaled)
        classical_kind = "classical-exact" if self.cfg.lp_mode == "exact" else "classical-approx"
        trace.modeled_classical_cost += modeled_cost(classical_kind, n, k, eps_scaled)

    def solve(self, lp: LpProblem, eps_scaled: float, factor: float, accuracy: float | None = None) -> LpSolution:
        """Solves at ``accuracy`` (default eps_scaled); modeled cost is booked at eps_scaled."""
        cfg = self.cfg
        target = eps_scaled if accuracy is None else accuracy
        solution = solve_lp(lp, cfg.lp_mode, target, factor, backend=cfg.approx_backend, rng=self.episode.rng)
        _, G, _, _ = lp.leq_form()
        self.episode.trace.lp_solves += 1
        self._book(lp.n_vars, G.shape[0], eps_scaled)
        if self.episode.record_rounds:
            self.episode.event(
                "lp-solve",
                family=lp.family,
                status=solution.status,
                value=float(solution.value),
                cost_units=solution.cost_units,
            )
        return solution

    def reuse(self, n: int, k: int, eps_scaled: float) -> None:
        """Books a round whose LP answer was carried over from an earlier solve."""
        self.episode.trace.lp_reuses += 1
        self._book(n, k, eps_scaled)


@dataclass
class ResidualPlan:
    dist: np.ndarray
    fallback: bool
    lp: LpProblem
    solution: LpSolution
    square_failed: bool = False


def residual_distribution(
    r_upper,
    c_lower,
    remaining,
    support,
    binding_rows=None,
    solve: Callable[[LpProblem], LpSolution] | None = None,
) -> ResidualPlan:
    """Arm distribution from the residual LP over ``support``.

    With ``binding_rows`` the square LP (binding rows consumed exactly) is
    tried first and the plain residual LP is the fallback. ``solve``
    defaults to the exact simplex.
    """
    solve = solve or solve_exact
    arms = sorted(int(i) for i in support)
    square_failed = False
    if binding_rows is not None:
        lp = residual_square_lp(r_upper, c_lower, remaining, arms, binding_rows)
        solution = solve(lp)
        if solution.solved:
            dist, fallback = safe_normalize(solution.x, arms)
            return ResidualPlan(dist=dist, fallback=fallback, lp=lp, solution=solution)
        square_failed = True
    lp = residual_lp(r_upper, c_lower, remaining, arms)
    solution = solve(lp)
    x = solution.x if solution.solved else np.zeros(len(r_upper))
    dist, fallback = safe_normalize(x, arms)
    return ResidualPlan(dist=dist, fallback=fallback, lp=lp, solution=solution, square_failed=square_failed)


@dataclass
class _CachedPlan:
    condition: str
    dist: np.ndarray
    shape: tuple
    basis: VertexBasis | None = None
    snapshot: tuple | None = None


class _ResidualPlanner:
    """Per-round Phase II distributions, carried over between rounds when still valid.

    Exact mode keeps the basis of the last simplex answer and re-certifies
    it against the current bounds and budget each round; a certified basis
    yields the optimum of the current LP. Approximate mode solves at half
    the target accuracy and keeps the answer while the scaled LP data
    (upper rewards, lower costs, per-round budget) drifts by at most the
    other half. A change between eq6 and eq7 always forces a solve.
    """

    def __init__(self, episode: BanditEpisode, cfg: RunConfig, support: list[int], binding: list[int], eps_scaled: float):
        self.episode = episode
        self.cfg = cfg
        self.support = support
        self.binding = binding
        self.eps_scaled = eps_scaled
        self.lps = _LpRecorder(episode, cfg)
        self._cached: _CachedPlan | None = None

    def _equality_rows(self, condition: str) -> list[int]:
        return self.binding if condition == EQ7 else []

    def _carry_over(self, condition, r_upper, c_lower, remaining, factor) -> np.ndarray | None:
        cached = self._cached
        if cached is None or cached.condition != condition:
            return None
        if cached.basis is not None:
            if condition == EQ7:
                lp = residual_square_lp(r_upper, c_lower, remaining, self.support, self.binding)
            else:
                lp = residual_lp(r_upper, c_lower, remaining, self.support)
            x = reoptimize(lp, cached.basis, self._equality_rows(condition))
            if x is None or x.sum() <= 0:
                return None
            dist, fallback = safe_normalize(x, self.support)
            return None if fallback else dist
        if cached.snapshot is not None:
            old_r, old_c, old_ratio = cached.snapshot
            drift = (
                float(np.abs(r_upper - old_r).max())
                + float(np.abs(c_lower - old_c).max())
                + float(np.abs(remaining / factor - old_ratio).max())
            )
            if drift <= self.eps_scaled / 2.0:
                return cached.dist
        return None

    def distribution(self, state: ConfidenceState, condition: str, t: int) -> np.ndarray:
        episode = self.episode
        remaining = episode.remaining
        factor = float(state.T - t + 1)
        r_upper, c_lower = state.r_upper, state.c_lower
        carried = self._carry_over(condition, r_upper, c_lower, remaining, factor)
        if carried is not None:
            self.lps.reuse(*self._cached.shape, self.eps_scaled)
            return carried

        exact = self.cfg.lp_mode == "exact"
        accuracy = self.eps_scaled if exact else self.eps_scaled / 2.0
        plan = residual_distribution(
            r_upper,
            c_lower,
            remaining,
            self.support,
            self.binding if condition == EQ7 else None,
            solve=lambda lp: self.lps.solve(lp, self.eps_scaled, factor, accuracy=accuracy),
        )
        if plan.square_failed:
            episode.event("eq7-fallback")
        if plan.fallback:
            episode.event("normalize-fallback", status=plan.solution.status)

        self._cached = None
        if plan.solution.solved and not plan.fallback and not plan.square_failed:
            _, G, _, _ = plan.lp.leq_form()
            cached = _CachedPlan(condition=condition, dist=plan.dist, shape=(plan.lp.n_vars, G.shape[0]))
            if exact:
                cached.basis = vertex_basis(plan.lp, plan.solution.x, self._equality_rows(condition))
                if cached.basis is not None:
                    self._cached = cached
            else:
                cached.snapshot = (r_upper, c_lower, np.asarray(remaining, dtype=float) / factor)
                self._cached = cached
        return plan.dist


def _check_preconditions(gt: GroundTruth, cfg: RunConfig) -> Alg2Constants:
    if not gt.nondegenerate:
        raise DegenerateInstanceError(
            "instance is degenerate (Assumption 1, non-degeneracy, fails: "
            f"|I*|={len(gt.I_star)}, |J*|={len(gt.J_star)}, delta={gt.delta}, sigma={gt.sigma:.3g}); "
            "the problem-dependent policy needs a unique, non-degenerate LP optimum"
        )
    if not cfg.supply_ground_truth_params:
        raise ConfigError("the problem-dependent policy needs supply_ground_truth_params=true for θ and ε")
    return Alg2Constants.from_ground_truth(gt)


def _warn_eps_lp(episode: BanditEpisode, gt: GroundTruth, cfg: RunConfig, constants: Alg2Constants) -> None:
    if not (cfg.is_quantum and cfg.lp_mode == "approx"):
        return
    bound = eps_lp_bound(gt, constants)
    if cfg.eps_lp > bound:
        details = {"eps_lp": cfg.eps_lp, "bound": bound, "T": gt.T, "seed": cfg.seed}
        log_system_event("EPS_LP_BOUND_WARN", details)
        logger.warning("eps_lp %.3g exceeds the regret-guarantee bound %.3g; proceeding", cfg.eps_lp, bound)
        episode.event("eps-lp-above-bound", eps_lp=cfg.eps_lp, bound=bound)


class _PhaseOne:
    """Doubling sweeps over all arms followed by the identification LPs."""

    def __init__(self, episode: BanditEpisode, state: ConfidenceState, cfg: RunConfig, constants: Alg2Constants):
        self.episode = episode
        self.state = state
        self.cfg = cfg
        self.constants = constants
        self.lps = _LpRecorder(episode, cfg)
        self.arms: set[int] = set()
        self.rows: set[int] = set()

    @property
    def resolved(self) -> bool:
        return len(self.arms) + len(self.rows) >= self.state.d

    def _estimate_quantum(self, arm: int, batch: int) -> None:
        state, episode, cfg = self.state, self.episode, self.cfg
        instance = episode.instance
        delta_q = min(0.5, self.constants.delta_qmc)
        reward_radius = cfg.c1 * math.log(1.0 / delta_q) / batch
        estimate, _ = qmc_univariate(
            instance.mean_rewards[arm],
            eps=min(reward_radius, 1.0),
            delta=delta_q,
            backend=cfg.estimator_backend,
            rng=episode.rng,
            c1=cfg.c1,
        )
        state.offer_reward(arm, estimate, reward_radius)
        if state.d > 1:
            n_eff = effective_samples(batch, cfg.c2)
            cost_radius = math.sqrt(state.d) * math.log(state.d / delta_q) / n_eff
            cost_estimate, _ = qmc_multivariate(
                instance.mean_costs[1:, arm], eps=min(cost_radius, 1.0), delta=delta_q, rng=episode.rng, c2=cfg.c2
            )
            state.offer_cost(arm, np.concatenate([[state.time_cost], cost_estimate]), cost_radius)
        state.budget.record_quantum(batch)
        episode.record_qmc(arm, batch, reward_radius, target="reward+cost")
        state.pending_queries[arm] = 0

    def _estimate_classical(self, arm: int) -> None:
        state = self.state
        n = state.n_pulls[arm]
        radius = hoeffding_radius(n, state.T, scale=PHASE1_HOEFFDING_SCALE)
        state.offer_reward(arm, state.reward_sum[arm] / n, radius)
        state.offer_cost(arm, state.cost_sum[:, arm] / n, radius)

    def sweep(self, batch: int) -> bool:
        """Pulls every arm ``batch`` times; False when the budget ran out."""
        episode, state = self.episode, self.state
        for arm in range(state.m):
            for _ in range(batch):
                if episode.should_stop():
                    return False
                reward, cost = episode.pull(arm)
                state.record_pull(arm, reward, cost)
            if self.cfg.is_quantum:
                self._estimate_quantum(arm, batch)
            else:
                self._estimate_classical(arm)
        return True

    @staticmethod
    def _beats(lower: float, upper: float) -> bool:
        return lower > upper + CLASSIFY_TOL * max(1.0, abs(lower))

    def identify(self) -> None:
        """Moves arms into Î* and rows into Ĵ′ once the conservative value beats their optimistic value."""
        state, episode = self.state, self.episode
        T, B = state.T, episode.instance.B
        eps, factor = self.cfg.eps_lp, float(T)
        r_lower, r_upper = state.r_lower, state.r_upper
        c_lower, c_upper = state.c_lower, state.c_upper
        lower = self.lps.solve(conservative_lp(r_lower, c_upper, B), eps, factor)
        if not lower.solved:
            return
        for arm in range(state.m):
            if arm in self.arms:
                continue
            upper = self.lps.solve(optimistic_arm_removed_lp(r_upper, c_lower, B, arm), eps, factor)
            if upper.solved and self._beats(lower.value, upper.value):
                self.arms.add(arm)
                episode.event("identify-arm", arm=arm)
        for row in range(state.d):
            if row in self.rows:
                continue
            upper = self.lps.solve(optimistic_constraint_lp(r_upper, c_lower, c_upper, B, row), eps, factor)
            if upper.solved and self._beats(lower.value, upper.value):
                self.rows.add(row)
                episode.event("identify-row", row=row)

    def run(self) -> bool:
        T = self.state.T
        k = 0
        self.episode.event("phase1-start")
        while not self.resolved:
            batch = int(math.ceil(math.log(T) * 2**k))
            if not self.sweep(max(batch, 1)):
                return False
            self.identify()
            self.episode.event("phase1-sweep", sweep=k, batch=batch, arms=sorted(self.arms), rows=sorted(self.rows))
            k += 1
        if len(self.arms) + len(self.rows) > self.state.d:
            self.episode.event("identification-overfull", arms=sorted(self.arms), rows=sorted(self.rows))
        return True


def _phase_two(
    episode: BanditEpisode,
    state: ConfidenceState,
    cfg: RunConfig,
    constants: Alg2Constants,
    support: list[int],
    binding: list[int],
) -> None:
    T = state.T
    eps_scaled = cfg.eps_lp / math.log(T) ** 2
    if not support:
        support = list(range(state.m))
        episode.event("empty-support-fallback")
    episode.event("phase2-start", support=support, binding=binding)
    planner = _ResidualPlanner(episode, cfg, support, binding, eps_scaled)
    while not episode.should_stop():
        t = episode.t + 1
        condition = phase2_condition(
            state, constants.theta, constants.eps_phase2, t, episode.remaining, support, binding
        )
        dist = planner.distribution(state, condition, t)
        arm = int(episode.rng.choice(state.m, p=dist))
        reward, cost = episode.pull(arm)
        if episode.record_rounds:
            episode.trace.rounds[-1]["dist"] = [float(p) for p in dist]
        state.record_pull(arm, reward, cost)
        n = state.n_pulls[arm]
        radius = hoeffding_radius(n, T, scale=PHASE2_HOEFFDING_SCALE)
        state.offer_reward(arm, state.reward_sum[arm] / n, radius)
        state.offer_cost(arm, state.cost_sum[:, arm] / n, radius)


def _run_alg2(instance: BwkInstance, cfg: RunConfig, ground_truth: GroundTruth) -> RunTrace:
    constants = _check_preconditions(ground_truth, cfg)
    episode = BanditEpisode(instance, cfg.algorithm, cfg.seed, cfg.record_rounds)
    _warn_eps_lp(episode, ground_truth, cfg, constants)
    budget = EstimatorBudget(c1=cfg.c1, c2=cfg.c2)
    if cfg.exact_bounds:
        state = ConfidenceState.exact(instance.mean_rewards, instance.mean_costs, instance.T, budget)
    else:
        state = ConfidenceState(m=instance.m, d=instance.d, T=instance.T, time_cost=instance.b, budget=budget)

    phase_one = _PhaseOne(episode, state, cfg, constants)
    completed = phase_one.run()
    trace = episode.trace
    trace.phase1_rounds = episode.t
    trace.identified_arms = sorted(phase_one.arms)
    trace.identified_rows = sorted(phase_one.rows)
    if not completed:
        episode.event(STOP_PHASE1_BUDGET, arms=trace.identified_arms, rows=trace.identified_rows)
        return episode.finish(STOP_PHASE1_BUDGET)

    if cfg.is_quantum:
        state.reset_classical()
    binding = [j for j in range(state.d) if j not in phase_one.rows]
    _phase_two(episode, state, cfg, constants, trace.identified_arms, binding)
    return episode.finish()


def run_alg2_quantum(instance: BwkInstance, cfg: RunConfig, ground_truth: GroundTruth) -> RunTrace:
    """Two-phase policy with QMC estimates in Phase I (quantum reward and cost radii)."""
    return _run_alg2(instance, cfg, ground_truth)


def run_alg2_classical(instance: BwkInstance, cfg: RunConfig, ground_truth: GroundTruth) -> RunTrace:
    """Two-phase policy with pooled Hoeffding radii sqrt(2 ln T / n) throughout."""
    return _run_alg2(instance, cfg, ground_truth)
