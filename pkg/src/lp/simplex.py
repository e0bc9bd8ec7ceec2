"""Dense two-phase simplex with Bland's rule, warm re-certification of a basis, and a vertex-enumeration oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from src.config.constants import BRUTE_FORCE_LIMIT, SIMPLEX_TOL
from src.lp.cost_model import modeled_cost
from src.lp.problem import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, LpSolution
from src.utils.errors import InvariantViolation, LpError


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    column = tableau[:, col].copy()
    column[row] = 0.0
    tableau -= np.outer(column, tableau[row])


def _run_simplex(tableau, basis, cost, tol, max_iter):
    """Maximizes cost·z on a tableau already in canonical form for ``basis``.

    Entering variable: lowest index with positive reduced cost. Leaving
    variable: min ratio, ties to the lowest basic index.
    """
    for iteration in range(max_iter):
        reduced = cost - cost[basis] @ tableau[:, :-1]
        candidates = np.flatnonzero(reduced > tol)
        if candidates.size == 0:
            return OPTIMAL, iteration
        col = int(candidates[0])
        column = tableau[:, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return UNBOUNDED, iteration
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        row = int(tied[np.argmin(basis[tied])])
        _pivot(tableau, row, col)
        basis[row] = col
    raise InvariantViolation(f"simplex did not terminate in {max_iter} pivots")


def _solve_leq(c, G, h, tol=SIMPLEX_TOL):
    """max c·x s.t. G x <= h, x >= 0. Returns (status, x, dual, pivots)."""
    k, n = G.shape
    if n == 0:
        status = OPTIMAL if np.all(h >= -tol) else INFEASIBLE
        return status, np.zeros(0), np.zeros(k) if status == OPTIMAL else None, 0

    M = np.hstack([G, np.eye(k)])
    b = h.astype(float).copy()
    negative = b < 0
    M[negative] *= -1.0
    b[negative] *= -1.0
    art_rows = np.flatnonzero(negative)
    art = np.zeros((k, art_rows.size))
    art[art_rows, np.arange(art_rows.size)] = 1.0
    tableau = np.hstack([M, art, b[:, None]])
    basis = np.arange(n, n + k)
    basis[art_rows] = n + k + np.arange(art_rows.size)
    max_iter = 50 * (n + 2 * k) + 100
    pivots = 0

    if art_rows.size:
        phase1_cost = np.zeros(n + k + art_rows.size)
        phase1_cost[n + k :] = -1.0
        _, it = _run_simplex(tableau, basis, phase1_cost, tol, max_iter)
        pivots += it
        infeasibility = -float(phase1_cost[basis] @ tableau[:, -1])
        if infeasibility > tol * max(1.0, float(np.abs(h).max())):
            return INFEASIBLE, None, None, pivots
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for row in range(k):
            if basis[row] < n + k:
                keep.append(row)
                continue
            candidates = np.flatnonzero(np.abs(tableau[row, : n + k]) > tol)
            if candidates.size:
                _pivot(tableau, row, int(candidates[0]))
                basis[row] = int(candidates[0])
                keep.append(row)
        tableau = tableau[keep]
        basis = basis[keep]
        tableau = np.hstack([tableau[:, : n + k], tableau[:, -1:]])

    cost = np.concatenate([c, np.zeros(k)])
    status, it = _run_simplex(tableau, basis, cost, tol, max_iter)
    pivots += it
    if status == UNBOUNDED:
        return UNBOUNDED, None, None, pivots

    z = np.zeros(n + k)
    z[basis] = tableau[:, -1]
    x = np.clip(z[:n], 0.0, None)

    basis_matrix = np.hstack([G, np.eye(k)])[:, basis]
    if basis_matrix.shape[0] == basis_matrix.shape[1]:
        dual = np.linalg.solve(basis_matrix.T, cost[basis])
    else:
        dual = np.linalg.lstsq(basis_matrix.T, cost[basis], rcond=None)[0]
    return OPTIMAL, x, dual, pivots


def _exact_cost_units(lp: LpProblem) -> dict:
    rows = lp.A.shape[0] + (0 if lp.geq_A is None else lp.geq_A.shape[0])
    return {"classical": modeled_cost("classical-exact", lp.n_vars, rows, 1.0)}


def solve_exact(lp: LpProblem) -> LpSolution:
    """Solves an LpProblem to optimality.

    Pins are removed by column deletion and >= rows are negated into the
    <= block. The dual vector covers the stacked rows (A rows first, then
    the negated geq rows).
    """
    c, G, h, free = lp.leq_form()
    status, x_free, dual, pivots = _solve_leq(c, G, h)
    units = _exact_cost_units(lp)
    if status != OPTIMAL:
        value = np.inf if status == UNBOUNDED else -np.inf
        return LpSolution(
            x=np.zeros(lp.n_vars), value=value, status=status, cost_units=units, iterations=pivots
        )
    x = lp.expand(x_free)
    return LpSolution(
        x=x,
        value=lp.evaluate(x),
        status=OPTIMAL,
        dual=dual,
        feas_violation=max(0.0, lp.violation(x)),
        cost_units=units,
        iterations=pivots,
    )


@dataclass(frozen=True)
class VertexBasis:
    """Positive variables and tight <= rows of a nondegenerate vertex."""

    columns: tuple
    rows: tuple


def _rhs_scale(lp: LpProblem) -> float:
    return max(1.0, float(np.abs(lp.rhs).max()) if lp.rhs.size else 1.0)


def vertex_basis(lp: LpProblem, x, equality_rows=(), tol: float = SIMPLEX_TOL) -> VertexBasis | None:
    """Reads the basis off an optimal point of ``lp``.

    Rows listed in ``equality_rows`` count as tight. Returns None for the
    zero point and for degenerate vertices (as many positive variables as
    tight rows is required).
    """
    x = np.asarray(x, dtype=float)
    scale = _rhs_scale(lp)
    columns = tuple(k for k in lp.free_vars if x[k] > tol * scale)
    slack = lp.rhs - lp.A @ x
    tight = {int(j) for j in np.flatnonzero(np.abs(slack) <= tol * scale)} | {int(j) for j in equality_rows}
    rows = tuple(sorted(tight))
    if not columns or len(columns) != len(rows):
        return None
    return VertexBasis(columns=columns, rows=rows)


def reoptimize(lp: LpProblem, basis: VertexBasis, equality_rows=(), tol: float = SIMPLEX_TOL) -> np.ndarray | None:
    """Primal point of ``basis`` on ``lp`` when the basis is still optimal there, else None.

    Optimal means primal feasible (nonnegative basic values, every
    constraint of ``lp`` met) and dual feasible (nonnegative duals on tight
    inequality rows, no free variable with positive reduced cost). Duals
    of ``equality_rows`` are unrestricted.
    """
    columns, rows = list(basis.columns), list(basis.rows)
    square = lp.A[np.ix_(rows, columns)]
    if np.linalg.cond(square) > 1e12:
        return None
    x_basic = np.linalg.solve(square, lp.rhs[rows])
    dual = np.linalg.solve(square.T, lp.objective[columns])
    scale = _rhs_scale(lp)
    if np.any(x_basic < -tol * scale):
        return None
    x = np.zeros(lp.n_vars)
    x[columns] = np.clip(x_basic, 0.0, None)
    if lp.violation(x) > tol * scale:
        return None
    equality = set(int(j) for j in equality_rows)
    if any(dual[k] < -tol for k, j in enumerate(rows) if j not in equality):
        return None
    others = [k for k in lp.free_vars if k not in basis.columns]
    if others and np.any(lp.objective[others] - lp.A[np.ix_(rows, others)].T @ dual > tol):
        return None
    return x


def brute_force_vertices(lp: LpProblem, tol: float = SIMPLEX_TOL) -> LpSolution:
    """Optimum by enumerating every basic point of a small LP.

    Assumes the feasible region is bounded; unbounded inputs are not detected.
    """
    c, G, h, free = lp.leq_form()
    n = len(free)
    rows = G.shape[0]
    if lp.n_vars + rows > BRUTE_FORCE_LIMIT:
        raise LpError(
            f"brute force limited to variables + rows <= {BRUTE_FORCE_LIMIT}, got {lp.n_vars + rows}"
        )
    system = np.vstack([G, -np.eye(n)]) if n else G
    bounds = np.concatenate([h, np.zeros(n)])

    best_x, best_value = None, -np.inf
    if n == 0:
        if np.all(h >= -tol):
            best_x, best_value = np.zeros(0), 0.0
    else:
        for subset in itertools.combinations(range(system.shape[0]), n):
            square = system[list(subset)]
            if abs(np.linalg.det(square)) < 1e-12:
                continue
            point = np.linalg.solve(square, bounds[list(subset)])
            if np.all(system @ point <= bounds + tol * max(1.0, float(np.abs(bounds).max()))):
                value = float(c @ point)
                if value > best_value + 1e-12:
                    best_x, best_value = point, value

    if best_x is None:
        return LpSolution(x=np.zeros(lp.n_vars), value=-np.inf, status=INFEASIBLE)
    x = lp.expand(np.clip(best_x, 0.0, None))
    return LpSolution(
        x=x, value=lp.evaluate(x), status=OPTIMAL, feas_violation=max(0.0, lp.violation(x))
    )
