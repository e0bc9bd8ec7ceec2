"""Modeled LP solver cost in abstract units (no wall-clock)."""

import math

KINDS = ("quantum", "classical-approx", "classical-exact")
MATMUL_EXPONENT = 2.372


def modeled_cost(kind, m, d, eps):
    """Cost units of one LP solve with m variables and d constraints at accuracy eps.

    quantum: sqrt(m+d) * eps^-2.5; classical-approx: (m+d) * eps^-2;
    classical-exact: max(m, d)^2.372 (eps unused).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    size = m + d
    if kind == "quantum":
        return math.sqrt(size) * eps ** -2.5
    if kind == "classical-approx":
        return size * eps ** -2.0
    if kind == "classical-exact":
        return float(max(m, d)) ** MATMUL_EXPONENT
    raise ValueError(f"unknown cost kind '{kind}', expected one of {KINDS}")
