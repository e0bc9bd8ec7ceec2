"""Named instances and the planted nondegenerate family."""

from __future__ import annotations

import logging

import numpy as np

from src.config.constants import GENERATOR_ATTEMPTS
from src.model.ground_truth import compute_ground_truth
from src.model.instance import ArmDistribution, BwkInstance, RawInstance, augment_time_resource, load_instance
from src.utils.errors import GenerationFailedError, InstanceError
from src.utils.logging import log_system_event

logger = logging.getLogger(__name__)

CANONICAL_REWARDS = (0.9, 0.5)
CANONICAL_COSTS = ((1.0, 0.2),)


def two_point_arm(mean_reward: float, mean_costs) -> ArmDistribution:
    """Arm with two equally likely atoms whose averages match the given means."""
    means = [float(mean_reward)] + [float(c) for c in mean_costs]
    high = [min(1.0, 2.0 * mu) for mu in means]
    low = [max(0.0, 2.0 * mu - h) for mu, h in zip(means, high)]
    return ArmDistribution.from_atoms([(0.5, high[0], high[1:]), (0.5, low[0], low[1:])])


def point_arm(reward: float, costs) -> ArmDistribution:
    return ArmDistribution.from_atoms([(1.0, float(reward), [float(c) for c in costs])])


def instance_from_means(rewards, user_costs, T: int, B: float, deterministic: bool = False) -> BwkInstance:
    """Instance with the given mean rewards and (d_user x m) mean user costs.

    Arms are two-point unless ``deterministic``, which gives single atoms.
    """
    user_costs = np.asarray(user_costs, dtype=float).reshape(-1, len(rewards))
    build = point_arm if deterministic else two_point_arm
    arms = tuple(build(rewards[i], user_costs[:, i]) for i in range(len(rewards)))
    return augment_time_resource(RawInstance(T=int(T), B=float(B), arms=arms))


def canonical_instance(T: int = 100, B: float = 50.0) -> BwkInstance:
    """Two arms, one user resource: OPT_LP = 65 at T=100, B=50."""
    return instance_from_means(CANONICAL_REWARDS, CANONICAL_COSTS, T, B, deterministic=True)


def canonical_extended(T: int = 100, B: float = 50.0) -> BwkInstance:
    """The canonical instance plus a suboptimal third arm and a slack third resource."""
    rewards = CANONICAL_REWARDS + (0.1,)
    costs = (CANONICAL_COSTS[0] + (1.0,), (0.1, 0.1, 0.1))
    return instance_from_means(rewards, costs, T, B, deterministic=True)


def _planted_means(m: int, d_user: int, b: float, margin: float, rng: np.random.Generator):
    k = d_user + 1
    support = np.sort(rng.choice(m, size=k, replace=False))
    others = np.setdiff1d(np.arange(m), support)
    x = rng.dirichlet(np.ones(k))

    costs = np.empty((k, m))
    costs[0] = b
    for j in range(1, k):
        row = rng.uniform(0.2, 1.0, size=m)
        row[support] *= b / float(row[support] @ x)
        costs[j] = row
    if np.any(costs > 1.0):
        return None, "cost above 1 after rescaling"

    eta = rng.uniform(0.5, 1.5, size=k)
    eta *= rng.uniform(0.6, 0.9) / float((costs[:, support].T @ eta).max())
    rewards = costs.T @ eta
    gaps = margin + rng.uniform(0.0, margin, size=others.size)
    rewards[others] = np.clip(rewards[others] - gaps, 0.0, 1.0)
    return (rewards, costs[1:]), None


def generate_planted(
    m: int,
    d_user: int,
    b: float,
    margin: float,
    seed: int,
    T: int = 1000,
) -> BwkInstance:
    """Random instance with a planted optimal support of size d_user+1 and all gaps >= margin.

    The support plays a Dirichlet mix that exhausts every resource, the
    duals are positive, and off-support arms lose at least ``margin`` in
    reduced cost. Each candidate is checked with compute_ground_truth and
    redrawn from a fresh seed stream until it is nondegenerate with
    δ >= margin.
    """
    if m < 2:
        raise InstanceError("planted family needs m >= 2")
    if d_user + 1 > m:
        raise InstanceError("planted family needs m >= d_user + 1")
    if margin <= 0:
        raise InstanceError("margin must be positive")
    if not 0 < b <= 1:
        raise InstanceError("b must lie in (0, 1]")

    for attempt in range(GENERATOR_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), attempt]))
        means, reason = _planted_means(m, d_user, b, margin, rng)
        if means is not None:
            instance = instance_from_means(means[0], means[1], T, b * T)
            gt = compute_ground_truth(instance)
            if not gt.nondegenerate:
                reason = "degenerate"
            elif gt.delta < margin - 1e-12:
                reason = f"delta {gt.delta:.4g} below margin"
            else:
                return instance
        log_system_event("GENERATOR_RESAMPLE", {"seed": seed, "attempt": attempt, "reason": reason})
        logger.debug("planted instance rejected (attempt %d): %s", attempt, reason)
    raise GenerationFailedError(f"generation failed after {GENERATOR_ATTEMPTS} attempts")


INSTANCE_SOURCE_KEYS = ("generator", "file", "T", "m", "d_user", "b", "margin", "seed", "budget")


def instance_from_source(source: dict) -> BwkInstance:
    """Builds the base instance of an experiment from its config block.

    ``generator`` is one of canonical, canonical-extended, planted; ``file``
    loads an instance JSON instead. ``budget`` fixes B, otherwise B = b·T.
    """
    T = int(source.get("T", 100))
    if source.get("file"):
        instance = load_instance(source["file"])
        log_system_event("INSTANCE_LOADED", {"path": source["file"], "m": instance.m, "d": instance.d})
    else:
        kind = source.get("generator", "canonical")
        if kind == "canonical":
            instance = canonical_instance(T, float(source.get("b", 0.5)) * T)
        elif kind == "canonical-extended":
            instance = canonical_extended(T, float(source.get("b", 0.5)) * T)
        elif kind == "planted":
            instance = generate_planted(
                m=int(source.get("m", 3)),
                d_user=int(source.get("d_user", 1)),
                b=float(source.get("b", 0.25)),
                margin=float(source.get("margin", 0.05)),
                seed=int(source.get("seed", 0)),
                T=T,
            )
        else:
            raise InstanceError(f"unknown generator '{kind}'")
    if source.get("budget") is not None:
        instance = instance.with_horizon(instance.T, float(source["budget"]))
    return instance
