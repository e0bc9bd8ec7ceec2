"""Graceful failure utilities for sweeps and numeric edge cases."""

from __future__ import annotations

from typing import Callable, TypeVar

import numpy as np

from src.utils.logging import log_error

T = TypeVar("T")


def safe_run(
    run_fn: Callable[[], T],
    context: str = "run",
    details: dict | None = None,
) -> tuple[T | None, str | None]:
    """Execute a callable with graceful failure.

    On exception, the error is written to the JSON error log instead of
    propagating, so one bad replication does not abort a sweep.

    Args:
        run_fn: Zero-argument callable doing the work.
        context: Label stored with the error entry.
        details: Extra fields stored with the error entry.

    Returns:
        (result, None) on success, (None, "<ExcType>: <message>") on failure.
    """
    try:
        return run_fn(), None
    except Exception as e:
        log_error(e, context=context, details=details)
        return None, f"{type(e).__name__}: {e}"


def safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Element-wise ratio where a zero denominator ranks as +inf.

    Args:
        numerator: Non-negative scores.
        denominator: Non-negative costs.

    Returns:
        Array of ratios; entries with denominator <= 0 are +inf.
    """
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    out = np.full(numerator.shape, np.inf)
    positive = denominator > 0
    out[positive] = numerator[positive] / denominator[positive]
    return out


def safe_normalize(
    weights: np.ndarray, support: list[int], tol: float = 1e-12
) -> tuple[np.ndarray, bool]:
    """Turn a possibly noisy non-negative vector into a distribution.

    Negative entries are clamped to zero. If the remaining mass is below
    ``tol`` or the clamped negative mass dominates it, the uniform
    distribution over ``support`` is returned instead.

    Returns:
        (distribution, used_fallback)
    """
    weights = np.asarray(weights, dtype=float)
    positive = np.clip(weights, 0.0, None)
    negative_mass = float(-np.clip(weights, None, 0.0).sum())
    mass = float(positive.sum())
    if mass <= tol or negative_mass > mass:
        dist = np.zeros_like(weights)
        if support:
            dist[list(support)] = 1.0 / len(support)
        return dist, True
    return positive / mass, False
