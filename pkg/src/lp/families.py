"""Builders for the LP families used by ground truth and Algorithm 2.

Budgets may be a scalar (uniform B) or a per-row vector (remaining budget).
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from src.lp.problem import LpProblem


def _budget_vector(B, rows: int) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    return np.full(rows, float(B)) if B.ndim == 0 else B.reshape(-1)


def primal_lp(r, C, B, family: str = "primal") -> LpProblem:
    """max r·ξ s.t. C ξ <= B, ξ >= 0."""
    C = np.asarray(C, dtype=float)
    return LpProblem(objective=r, A=C, rhs=_budget_vector(B, C.shape[0]), family=family)


def arm_removed_lp(r, C, B, arm: int, family: str = "arm_removed") -> LpProblem:
    """The primal LP with ξ_arm pinned to zero."""
    lp = primal_lp(r, C, B, family=family)
    lp.pinned_zero = frozenset({int(arm)})
    return lp


def constraint_augmented_lp(r, C, B, row: int, cost_for_objective=None, family: str = "constraint_augmented") -> LpProblem:
    """Primal form of  min B·η − B_row  s.t. C^T η >= r + C_row, η >= 0.

    By duality this equals  max (r + C_row)·ξ − B_row  s.t. C ξ <= B.
    ``cost_for_objective`` lets the objective use a different cost matrix
    than the constraints (upper bounds in the objective, lower bounds in
    the constraints).
    """
    C = np.asarray(C, dtype=float)
    budget = _budget_vector(B, C.shape[0])
    objective_costs = C if cost_for_objective is None else np.asarray(cost_for_objective, dtype=float)
    return LpProblem(
        objective=np.asarray(r, dtype=float) + objective_costs[row],
        A=C,
        rhs=budget,
        offset=-float(budget[row]),
        family=family,
    )


def conservative_lp(r_lower, C_upper, B) -> LpProblem:
    """Lower confidence estimate of OPT_LP."""
    return primal_lp(r_lower, C_upper, B, family="conservative")


def optimistic_arm_removed_lp(r_upper, C_lower, B, arm: int) -> LpProblem:
    """Upper confidence estimate of OPT_i."""
    return arm_removed_lp(r_upper, C_lower, B, arm, family="optimistic_arm_removed")


def optimistic_constraint_lp(r_upper, C_lower, C_upper, B, row: int) -> LpProblem:
    """Upper confidence estimate of OPT_j: objective r^U + C^U_row over C^L."""
    return constraint_augmented_lp(
        r_upper, C_lower, B, row, cost_for_objective=C_upper, family="optimistic_constraint"
    )


def residual_lp(r_upper, C_lower, remaining, support: Iterable[int]) -> LpProblem:
    """Adaptive LP over the identified support with the remaining budget."""
    r_upper = np.asarray(r_upper, dtype=float)
    support = set(int(i) for i in support)
    lp = primal_lp(r_upper, C_lower, remaining, family="residual")
    lp.pinned_zero = frozenset(i for i in range(r_upper.size) if i not in support)
    return lp


def residual_square_lp(r_upper, C_lower, remaining, support: Iterable[int], binding_rows: Iterable[int]) -> LpProblem:
    """Residual LP that also forces the binding rows to consume their whole remaining budget."""
    lp = residual_lp(r_upper, C_lower, remaining, support)
    rows = sorted(int(j) for j in binding_rows)
    remaining = np.asarray(remaining, dtype=float)
    lp.geq_A = np.asarray(C_lower, dtype=float)[rows]
    lp.geq_rhs = remaining[rows]
    lp.family = "residual_square"
    return lp
