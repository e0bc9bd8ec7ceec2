"""BwK instances: discrete joint reward/consumption distributions per arm."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.utils.errors import InstanceError
from src.utils.file_io import atomic_write_json, read_json

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ArmDistribution:
    """Finite joint distribution of (reward, cost vector) for one arm.

    ``costs`` has one row per atom and one column per resource.
    """

    probs: tuple
    rewards: tuple
    costs: tuple

    def __post_init__(self):
        if len(self.probs) == 0:
            raise InstanceError("arm support is empty")
        if not (len(self.probs) == len(self.rewards) == len(self.costs)):
            raise InstanceError("atom fields have different lengths")
        widths = {len(c) for c in self.costs}
        if len(widths) != 1:
            raise InstanceError("atoms disagree on the number of resources")
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < 0) or np.any(probs > 1):
            raise InstanceError("atom probability outside [0, 1]")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise InstanceError(f"atom probabilities sum to {probs.sum():.15f}, expected 1")
        values = np.concatenate([np.asarray(self.rewards, dtype=float), np.asarray(self.costs, dtype=float).ravel()])
        if np.any(values < 0) or np.any(values > 1):
            raise InstanceError("atom outside [0,1]")

    @classmethod
    def from_atoms(cls, atoms) -> "ArmDistribution":
        """Builds from [(p, reward, cost_vector), ...]."""
        return cls(
            probs=tuple(float(a[0]) for a in atoms),
            rewards=tuple(float(a[1]) for a in atoms),
            costs=tuple(tuple(float(v) for v in a[2]) for a in atoms),
        )

    @property
    def n_resources(self) -> int:
        return len(self.costs[0])

    @property
    def mean_reward(self) -> float:
        return float(np.dot(self.probs, self.rewards))

    @property
    def mean_cost(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float) @ np.asarray(self.costs, dtype=float)

    def with_time_row(self, b: float) -> "ArmDistribution":
        return ArmDistribution(
            probs=self.probs,
            rewards=self.rewards,
            costs=tuple((b,) + tuple(c) for c in self.costs),
        )


@dataclass(frozen=True)
class RawInstance:
    """User-facing instance before the time resource is added."""

    T: int
    B: float
    arms: tuple


@dataclass(frozen=True)
class BwkInstance:
    """Augmented instance: resource 0 is time, consumed at rate b = B/T by every pull."""

    T: int
    B: float
    arms: tuple
    _cumulative: tuple = field(init=False, repr=False, compare=False)
    _rewards: tuple = field(init=False, repr=False, compare=False)
    _costs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.T < 1:
            raise InstanceError("horizon must be at least 1")
        if not 0 < self.B <= self.T:
            raise InstanceError("budget exceeds horizon" if self.B > self.T else "budget must be positive")
        if not self.arms:
            raise InstanceError("instance needs at least one arm")
        widths = {arm.n_resources for arm in self.arms}
        if len(widths) != 1:
            raise InstanceError("arms disagree on the number of resources")
        for arm in self.arms:
            if any(abs(c[0] - self.b) > 0 for c in arm.costs):
                raise InstanceError("time resource consumption must equal b on every atom")
        object.__setattr__(self, "_cumulative", tuple(np.cumsum(arm.probs) for arm in self.arms))
        object.__setattr__(self, "_rewards", tuple(np.asarray(arm.rewards, dtype=float) for arm in self.arms))
        costs = tuple(np.asarray(arm.costs, dtype=float) for arm in self.arms)
        for c in costs:
            c.setflags(write=False)
        object.__setattr__(self, "_costs", costs)

    @property
    def m(self) -> int:
        return len(self.arms)

    @property
    def d(self) -> int:
        return self.arms[0].n_resources

    @property
    def b(self) -> float:
        return self.B / self.T

    @property
    def mean_rewards(self) -> np.ndarray:
        return np.array([arm.mean_reward for arm in self.arms])

    @property
    def mean_costs(self) -> np.ndarray:
        """d x m matrix of expected consumption."""
        return np.column_stack([arm.mean_cost for arm in self.arms])

    def with_horizon(self, T: int, B: float | None = None) -> "BwkInstance":
        """Same arms and user resources at a new horizon; B defaults to b·T."""
        B = self.b * T if B is None else B
        raw = RawInstance(
            T=T,
            B=B,
            arms=tuple(
                ArmDistribution(arm.probs, arm.rewards, tuple(tuple(c[1:]) for c in arm.costs))
                for arm in self.arms
            ),
        )
        return augment_time_resource(raw)


def augment_time_resource(raw: RawInstance) -> BwkInstance:
    """Prepends the time resource: consumption b = B/T on every atom, budget B."""
    if raw.B > raw.T:
        raise InstanceError("budget exceeds horizon")
    if raw.B <= 0:
        raise InstanceError("budget must be positive")
    b = raw.B / raw.T
    return BwkInstance(T=int(raw.T), B=float(raw.B), arms=tuple(arm.with_time_row(b) for arm in raw.arms))


def sample_arm(instance: BwkInstance, arm_index: int, rng: np.random.Generator) -> tuple[float, np.ndarray]:
    """Draws one atom of arm ``arm_index`` (0-based); reward and costs come from the same atom."""
    if not 0 <= arm_index < instance.m:
        raise InstanceError(f"arm index {arm_index} outside [0, {instance.m})")
    cumulative = instance._cumulative[arm_index]
    atom = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    atom = min(atom, cumulative.size - 1)
    return float(instance._rewards[arm_index][atom]), instance._costs[arm_index][atom]


INSTANCE_KEYS = {"m", "d_user", "T", "B", "arms"}


def instance_from_dict(payload: dict) -> BwkInstance:
    """Parses the instance JSON layout {"m","d_user","T","B","arms":[{"atoms":[{"p","reward","cost"}]}]}."""
    unknown = set(payload) - INSTANCE_KEYS
    if unknown:
        raise InstanceError(f"unknown instance keys: {sorted(unknown)}")
    missing = INSTANCE_KEYS - set(payload)
    if missing:
        raise InstanceError(f"instance is missing keys: {sorted(missing)}")
    arms = []
    for index, arm in enumerate(payload["arms"]):
        atoms = arm.get("atoms", [])
        for atom in atoms:
            if set(atom) != {"p", "reward", "cost"}:
                raise InstanceError(f"arm {index}: atoms need exactly the keys p, reward, cost")
            if len(atom["cost"]) != payload["d_user"]:
                raise InstanceError(f"arm {index}: cost vector length differs from d_user")
        arms.append(ArmDistribution.from_atoms([(a["p"], a["reward"], a["cost"]) for a in atoms]))
    if len(arms) != payload["m"]:
        raise InstanceError(f"m={payload['m']} but {len(arms)} arms given")
    return augment_time_resource(RawInstance(T=int(payload["T"]), B=float(payload["B"]), arms=tuple(arms)))


def instance_to_dict(instance: BwkInstance) -> dict:
    return {
        "m": instance.m,
        "d_user": instance.d - 1,
        "T": instance.T,
        "B": instance.B,
        "arms": [
            {
                "atoms": [
                    {"p": p, "reward": reward, "cost": list(cost[1:])}
                    for p, reward, cost in zip(arm.probs, arm.rewards, arm.costs)
                ]
            }
            for arm in instance.arms
        ],
    }


def load_instance(path: str) -> BwkInstance:
    return instance_from_dict(read_json(path))


def save_instance(instance: BwkInstance, path: str) -> str:
    return atomic_write_json(path, instance_to_dict(instance))
