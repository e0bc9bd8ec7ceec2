"""Classical Hoeffding confidence bounds."""

from __future__ import annotations

import numpy as np

from src.utils.errors import EstimatorError


def hoeffding_radius(n, T, scale: float = 3.0):
    """sqrt(scale · ln T / n); vectorized over n."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr <= 0):
        raise EstimatorError("no samples")
    radius = np.sqrt(scale * np.log(T) / n_arr)
    return float(radius) if radius.ndim == 0 else radius


def hoeffding_bounds(total, n, T, scale: float = 3.0):
    """(mean − radius, mean + radius) with radius sqrt(scale · ln T / n), unprojected."""
    radius = hoeffding_radius(n, T, scale)
    mean = np.asarray(total, dtype=float) / np.asarray(n, dtype=float)
    if mean.ndim == 0:
        mean = float(mean)
    return mean - radius, mean + radius
