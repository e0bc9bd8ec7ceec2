"""Run traces and the simulated BwK environment a policy interacts with."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.model.instance import BwkInstance, sample_arm
from src.utils.errors import InvariantViolation

STOP_HORIZON = "horizon"
STOP_BUDGET = "budget"
STOP_PHASE1_BUDGET = "phase1-budget-exhausted"


@dataclass
class RunTrace:
    algo: str
    seed: int
    T: int
    B: float
    m: int
    d: int
    rounds: list = field(default_factory=list)
    events: list = field(default_factory=list)
    tau: int = 0
    total_realized_reward: float = 0.0
    total_pseudo_reward: float = 0.0
    pulls: list = field(default_factory=list)
    remaining_budget: list = field(default_factory=list)
    expected_consumption: list = field(default_factory=list)
    stop_reason: str = ""
    exhausted_rows: list = field(default_factory=list)
    phase1_rounds: int = 0
    identified_arms: list | None = None
    identified_rows: list | None = None
    qmc_calls: int = 0
    qmc_queries: int = 0
    lp_solves: int = 0
    lp_reuses: int = 0
    modeled_quantum_cost: float = 0.0
    modeled_classical_cost: float = 0.0
    final_weights: list | None = None

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e["kind"] == kind]

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "seed": self.seed,
            "T": self.T,
            "B": self.B,
            "m": self.m,
            "d": self.d,
            "tau": self.tau,
            "total_realized_reward": self.total_realized_reward,
            "total_pseudo_reward": self.total_pseudo_reward,
            "stop_reason": self.stop_reason,
            "exhausted_rows": list(self.exhausted_rows),
            "phase1_rounds": self.phase1_rounds,
            "pulls": list(self.pulls),
            "remaining_budget": list(self.remaining_budget),
            "expected_consumption": list(self.expected_consumption),
            "identified_arms": self.identified_arms,
            "identified_rows": self.identified_rows,
            "qmc_calls": self.qmc_calls,
            "qmc_queries": self.qmc_queries,
            "lp_solves": self.lp_solves,
            "lp_reuses": self.lp_reuses,
            "modeled_quantum_cost": self.modeled_quantum_cost,
            "modeled_classical_cost": self.modeled_classical_cost,
            "final_weights": self.final_weights,
            "rounds": self.rounds,
            "events": self.events,
        }


class BanditEpisode:
    """One replication: owns the rng, the remaining budget and the trace.

    A pull is allowed only while fewer than T rounds were played and every
    remaining budget is at least 1.
    """

    def __init__(self, instance: BwkInstance, algo: str, seed: int, record_rounds: bool = True):
        self.instance = instance
        self.rng = np.random.default_rng(seed)
        self.record_rounds = record_rounds
        self.t = 0
        self.remaining = np.full(instance.d, float(instance.B))
        self._mean_rewards = instance.mean_rewards
        self._mean_costs = instance.mean_costs
        self._pulls = np.zeros(instance.m, dtype=int)
        self._expected = np.zeros(instance.d)
        self.trace = RunTrace(
            algo=algo, seed=int(seed), T=instance.T, B=instance.B, m=instance.m, d=instance.d
        )

    def should_stop(self) -> bool:
        return self.t >= self.instance.T or bool(np.any(self.remaining < 1.0))

    def pull(self, arm: int) -> tuple[float, np.ndarray]:
        if self.should_stop():
            raise InvariantViolation("pull requested after the stopping rule fired")
        reward, cost = sample_arm(self.instance, arm, self.rng)
        self.t += 1
        self.remaining = self.remaining - cost
        if np.any(self.remaining < -1e-12):
            raise InvariantViolation("remaining budget went negative")
        self._pulls[arm] += 1
        self._expected += self._mean_costs[:, arm]
        trace = self.trace
        trace.total_realized_reward += reward
        trace.total_pseudo_reward += float(self._mean_rewards[arm])
        if self.record_rounds:
            trace.rounds.append(
                {
                    "t": self.t,
                    "arm": int(arm),
                    "reward": float(reward),
                    "cost": [float(c) for c in cost],
                    "remaining": [float(v) for v in self.remaining],
                }
            )
        return reward, cost

    def event(self, kind: str, **details) -> None:
        self.trace.events.append({"t": self.t, "kind": kind, **details})

    def record_qmc(self, arm: int, queries: int, radius: float, target: str) -> None:
        self.trace.qmc_calls += 1
        self.trace.qmc_queries += int(queries)
        self.event("qmc", arm=int(arm), queries=int(queries), radius=float(radius), target=target)

    def finish(self, reason: str | None = None) -> RunTrace:
        trace = self.trace
        trace.tau = self.t
        if reason is None:
            reason = STOP_HORIZON if self.t >= self.instance.T else STOP_BUDGET
        trace.stop_reason = reason
        trace.pulls = [int(n) for n in self._pulls]
        trace.remaining_budget = [float(max(v, 0.0)) for v in self.remaining]
        trace.exhausted_rows = [int(j) for j in np.flatnonzero(self.remaining < 1.0)]
        trace.expected_consumption = [float(v) for v in self._expected]
        self.event("stop", reason=reason)
        return trace
