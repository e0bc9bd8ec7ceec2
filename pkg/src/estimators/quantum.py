"""Emulated quantum mean estimation with exact query accounting.

The idealized backends draw inside the accuracy band with probability
1 − δ and uniformly over the whole range otherwise. The ae-analytic
backend samples the amplitude-estimation outcome law and boosts it with a
median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.config.constants import BISECTION_ITERS, DEFAULT_C1, DEFAULT_C2
from src.utils.errors import EstimatorError

AE_SUCCESS = 8.0 / math.pi**2


@dataclass
class EstimatorBudget:
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    delta_fail: float | None = None
    classical_queries: int = 0
    quantum_queries: int = 0
    qmc_calls: int = 0

    def __post_init__(self):
        if self.c1 < 1 or self.c2 < 1:
            raise EstimatorError("estimator constants c1, c2 must be >= 1")

    def record_classical(self, n: int = 1) -> None:
        self.classical_queries += int(n)

    def record_quantum(self, n: int) -> None:
        self.quantum_queries += int(n)
        self.qmc_calls += 1

    @property
    def query_count(self) -> dict:
        return {"classical": self.classical_queries, "quantum": self.quantum_queries}


def _check_accuracy(eps: float, delta: float) -> None:
    if not 0 < eps <= 1:
        raise EstimatorError(f"eps must lie in (0, 1], got {eps}")
    if not 0 < delta < 1:
        raise EstimatorError(f"delta must lie in (0, 1), got {delta}")


def log_factor(x: float) -> float:
    """sqrt(ln x) with the log floored at 1."""
    return math.sqrt(max(math.log(x), 1.0))


def qmc1_queries(eps: float, delta: float, c1: float = DEFAULT_C1) -> int:
    return int(math.ceil(c1 / eps * math.log(1.0 / delta)))


def qmc2_queries(d: int, eps: float, delta: float, c2: float = DEFAULT_C2) -> int:
    core = math.sqrt(d) * math.log(d / delta) / eps
    return int(math.ceil(c2 * core * log_factor(core)))


def effective_samples(queries: float, c2: float = DEFAULT_C2) -> float:
    """Inverts queries = c2 · n · sqrt(ln n) for n in [2, queries] by bisection."""
    lo, hi = 2.0, max(2.0, float(queries))
    if c2 * lo * log_factor(lo) >= queries:
        return lo
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if c2 * mid * log_factor(mid) <= queries:
            lo = mid
        else:
            hi = mid
    return lo


def amplitude_estimation_law(a: float, M: int) -> np.ndarray:
    """P(y), y = 0..M−1, for phase estimation of θ_a = arcsin(sqrt(a))/π on an M-point grid."""
    if M < 2 or M & (M - 1):
        raise EstimatorError(f"M must be a power of two >= 2, got {M}")
    theta = math.asin(math.sqrt(min(max(a, 0.0), 1.0))) / math.pi
    grid = np.arange(M) / M
    diff = np.abs(theta - grid) % 1.0
    gap = np.minimum(diff, 1.0 - diff)
    denominator = M**2 * np.sin(np.pi * gap) ** 2
    probs = np.ones(M)
    regular = denominator > 1e-24
    probs[regular] = np.sin(M * np.pi * gap[regular]) ** 2 / denominator[regular]
    return probs


def amplitude_estimation_sample(a: float, M: int, rng: np.random.Generator) -> float:
    """One amplitude-estimation outcome â = sin²(πy/M)."""
    probs = amplitude_estimation_law(a, M)
    y = int(rng.choice(M, p=probs / probs.sum()))
    return math.sin(math.pi * y / M) ** 2


def median_amplify(samples) -> float:
    values = list(samples)
    if not values:
        raise EstimatorError("median of an empty sample list")
    if len(values) % 2 == 0:
        raise EstimatorError("median amplification needs an odd number of samples")
    return float(np.median(values))


def ae_schedule(eps: float, delta: float) -> tuple[int, int]:
    """Grid size M with π/M + π²/M² <= eps and an odd repetition count for failure prob delta."""
    M = 2
    while math.pi / M + math.pi**2 / M**2 > eps:
        M *= 2
    repeats = int(math.ceil(math.log(1.0 / delta) / (2.0 * (AE_SUCCESS - 0.5) ** 2)))
    if repeats % 2 == 0:
        repeats += 1
    return M, max(1, repeats)


def qmc_univariate(
    true_mean: float,
    eps: float,
    delta: float,
    backend: str,
    rng: np.random.Generator,
    c1: float = DEFAULT_C1,
) -> tuple[float, int]:
    """Estimate of a [0, 1] mean within eps w.p. >= 1 − delta; queries per the univariate bound."""
    _check_accuracy(eps, delta)
    queries = qmc1_queries(eps, delta, c1)
    if backend == "idealized":
        if rng.random() < delta:
            return float(rng.uniform(0.0, 1.0)), queries
        low, high = max(0.0, true_mean - eps), min(1.0, true_mean + eps)
        return float(rng.uniform(low, high)), queries
    if backend == "ae-analytic":
        M, repeats = ae_schedule(eps, delta)
        samples = [amplitude_estimation_sample(true_mean, M, rng) for _ in range(repeats)]
        return median_amplify(samples), queries
    raise EstimatorError(f"unknown quantum backend '{backend}'")


def qmc_multivariate(
    true_mean,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    c2: float = DEFAULT_C2,
) -> tuple[np.ndarray, int]:
    """Estimate of a [0, 1]^d mean within eps in sup norm w.p. >= 1 − delta."""
    _check_accuracy(eps, delta)
    mean = np.asarray(true_mean, dtype=float).reshape(-1)
    if mean.size < 1:
        raise EstimatorError("multivariate estimation needs d >= 1")
    queries = qmc2_queries(mean.size, eps, delta, c2)
    if rng.random() < delta:
        return rng.uniform(0.0, 1.0, size=mean.size), queries
    low = np.clip(mean - eps, 0.0, 1.0)
    high = np.clip(mean + eps, 0.0, 1.0)
    return rng.uniform(low, high), queries
