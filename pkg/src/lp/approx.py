"""eps-approximate LP solving: rescaling, bisection over the game form, and backends."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.lp.cost_model import modeled_cost
from src.lp.game import game_from_arrays, play_zero_sum
from src.lp.problem import APPROX, INFEASIBLE, OPTIMAL, LpProblem, LpSolution
from src.lp.simplex import solve_exact
from src.utils.errors import ApproxFailedError, LpError
from src.utils.logging import log_system_event

logger = logging.getLogger(__name__)

OPTIMISTIC_STEP = 0.25


@dataclass(frozen=True)
class ScaleRecord:
    """How a scaled LP maps back: ξ = factor·ξ', value = factor·objective_factor·value'."""

    factor: float
    objective_factor: float
    row_factors: np.ndarray

    def to_original_eps(self, eps_scaled: float) -> float:
        worst = max(self.objective_factor, float(self.row_factors.max()) if self.row_factors.size else 1.0)
        return eps_scaled * self.factor * worst


def scale_for_approx(lp: LpProblem, factor: float, normalize: bool = True) -> tuple[LpProblem, ScaleRecord]:
    """Divides budgets by ``factor`` so that feasible points satisfy Σξ' <= 1.

    With ``normalize`` the objective and each row are also divided by
    max(1, largest magnitude) so every coefficient lands in [-1, 1]; this
    leaves the feasible set unchanged. Without it, out-of-range
    coefficients raise LpError.
    """
    if factor <= 0:
        raise LpError("scale factor must be positive")
    objective_factor = max(1.0, float(np.abs(lp.objective).max())) if normalize and lp.n_vars else 1.0
    rhs = lp.rhs / factor
    A = lp.A.copy()
    row_factors = np.ones(A.shape[0])
    if normalize and A.shape[0]:
        row_factors = np.maximum(1.0, np.maximum(np.abs(A).max(axis=1), np.abs(rhs)))
    A = A / row_factors[:, None]
    rhs = rhs / row_factors
    geq_A, geq_rhs = None, None
    if lp.geq_A is not None:
        geq_rhs = lp.geq_rhs / factor
        geq_factors = np.ones(lp.geq_A.shape[0])
        if normalize and lp.geq_A.shape[0]:
            geq_factors = np.maximum(1.0, np.maximum(np.abs(lp.geq_A).max(axis=1), np.abs(geq_rhs)))
        geq_A = lp.geq_A / geq_factors[:, None]
        geq_rhs = geq_rhs / geq_factors
        row_factors = np.concatenate([row_factors, geq_factors])
    scaled = LpProblem(
        objective=lp.objective / objective_factor,
        A=A,
        rhs=rhs,
        pinned_zero=lp.pinned_zero,
        geq_A=geq_A,
        geq_rhs=geq_rhs,
        offset=lp.offset / (factor * objective_factor),
        scale=factor,
        family=lp.family,
    )
    blocks = [scaled.objective, scaled.A.ravel(), scaled.rhs]
    if geq_A is not None:
        blocks += [geq_A.ravel(), geq_rhs]
    if max((float(np.abs(b).max()) for b in blocks if b.size), default=0.0) > 1.0 + 1e-12:
        raise LpError("coefficients outside [-1, 1] after scaling")
    return scaled, ScaleRecord(factor=float(factor), objective_factor=objective_factor, row_factors=row_factors)


def default_dual_bound(rhs: np.ndarray) -> float:
    """1 + 1/(smallest positive scaled budget)."""
    positive = rhs[rhs > 0]
    if positive.size == 0:
        return 2.0
    return 1.0 + 1.0 / float(positive.min())


def _approx_cost_units(n: int, k: int, eps: float) -> dict:
    return {
        "quantum": modeled_cost("quantum", n, k, eps),
        "classical": modeled_cost("classical-approx", n, k, eps),
    }


def _bisect(c, G, h, eps, R, accept_level, eps_game, step_size):
    """Bisection over α with game decisions. Returns (ξ' or None, steps, iterations).

    α is accepted once max_i (A ȳ)_i <= accept_level and rejected once
    min_j (x̄ A)_j > 0; the bisection keeps the point from the last accept.
    """
    n = c.size
    c_aug = np.concatenate([c, [0.0]])
    G_aug = np.hstack([G, np.zeros((G.shape[0], 1))])
    rows, cols = G.shape[0] + 3, n + 3
    cap = int(math.ceil(8.0 * (math.log(rows) + math.log(cols)) / (step_size * accept_level)))
    total_iterations = 0

    def decide(alpha):
        nonlocal total_iterations
        game = game_from_arrays(c_aug, G_aug, h, alpha)
        run = play_zero_sum(
            game.entries,
            step_size=step_size,
            max_iter=cap,
            optimistic=True,
            stop=lambda upper, lower: upper <= accept_level or lower > 0.0,
        )
        total_iterations += run.iterations
        if run.upper <= accept_level:
            accepted = True
        elif run.lower > 0.0:
            accepted = False
        else:
            accepted = run.value <= 0.0
        if not accepted:
            return None
        y_slack = run.y[-1]
        if y_slack < eps_game:
            return None
        return run.y[:n] / y_slack

    precision = eps / 2.0
    steps = max(1, int(math.ceil(math.log2(2.0 * R / precision))))
    lo, hi = -R, R
    best = None
    for _ in range(steps):
        alpha = 0.5 * (lo + hi)
        point = decide(alpha)
        if point is not None:
            lo, best = alpha, point
        else:
            hi = alpha
    if best is None:
        best = decide(-R)
    return best, steps, total_iterations


def solve_approx(
    lp_scaled: LpProblem,
    eps_lp_scaled: float,
    R_bound: float = 1.0,
    r_bound: float | None = None,
    step_size: float = OPTIMISTIC_STEP,
) -> LpSolution:
    """eps-optimal, eps-feasible solution of a scaled LP via the zero-sum reduction.

    Bisects α over [-R, R]. Each step runs optimistic MW on the game until
    the upper value drops below an accept level derived from eps/(r+1), or
    the lower value turns positive. ε'' = eps/(6R(r+1)) is the floor on the
    slack weight y_last, and the primal point is read off the column
    strategy as ξ'_k = y_k / y_last. A dummy zero column lets the game
    express Σξ' <= 1. One retry with both levels halved when the extracted
    point violates a constraint by more than eps.
    """
    if eps_lp_scaled <= 0:
        raise LpError("eps must be positive")
    if R_bound != 1.0:
        raise LpError("only R = 1 is supported; rescale the LP instead")
    c, G, h, _ = lp_scaled.leq_form()
    r_value = default_dual_bound(h) if r_bound is None else float(r_bound)
    eps_game = eps_lp_scaled / (6.0 * R_bound * (r_value + 1.0))
    # extracted points violate rows by at most 2U/(1-U) where U is the accepted upper value
    violation_target = eps_lp_scaled / (r_value + 1.0)
    accept_level = violation_target / (2.0 + violation_target)
    units = _approx_cost_units(lp_scaled.n_vars, G.shape[0], eps_lp_scaled)

    for _ in range(2):
        point, steps, iterations = _bisect(c, G, h, eps_lp_scaled, R_bound, accept_level, eps_game, step_size)
        if point is None:
            return LpSolution(
                x=np.zeros(lp_scaled.n_vars),
                value=-np.inf,
                status=INFEASIBLE,
                cost_units=units,
                iterations=iterations,
                bisection_steps=steps,
                dual_bound=r_value,
            )
        x = lp_scaled.expand(point)
        violation = max(0.0, lp_scaled.violation(x))
        if violation <= eps_lp_scaled:
            return LpSolution(
                x=x,
                value=lp_scaled.evaluate(x),
                status=APPROX,
                feas_violation=violation,
                opt_gap_bound=eps_lp_scaled,
                cost_units=units,
                iterations=iterations,
                bisection_steps=steps,
                dual_bound=r_value,
            )
        eps_game /= 2.0
        accept_level /= 2.0
        log_system_event("APPROX_RETRY", {"violation": violation, "eps": eps_lp_scaled, "eps_game": eps_game})
        logger.warning("approximate LP violation %.3g above eps %.3g, retrying", violation, eps_lp_scaled)
    raise ApproxFailedError(f"approx-failed: violation {violation:.3g} exceeds eps {eps_lp_scaled:.3g}")


def unscale_solution(lp: LpProblem, scaled_solution: LpSolution, record: ScaleRecord) -> LpSolution:
    """Maps a solution of the scaled LP back to original units."""
    if not scaled_solution.solved:
        return LpSolution(
            x=np.zeros(lp.n_vars),
            value=scaled_solution.value,
            status=scaled_solution.status,
            cost_units=scaled_solution.cost_units,
            iterations=scaled_solution.iterations,
            bisection_steps=scaled_solution.bisection_steps,
            dual_bound=scaled_solution.dual_bound,
        )
    x = scaled_solution.x * record.factor
    return LpSolution(
        x=x,
        value=lp.evaluate(x),
        status=scaled_solution.status,
        feas_violation=max(0.0, lp.violation(x)),
        opt_gap_bound=record.to_original_eps(scaled_solution.opt_gap_bound),
        cost_units=scaled_solution.cost_units,
        iterations=scaled_solution.iterations,
        bisection_steps=scaled_solution.bisection_steps,
        dual_bound=scaled_solution.dual_bound,
    )


def solve_idealized_approx(lp: LpProblem, eps_abs: float, rng: np.random.Generator) -> LpSolution:
    """Exact optimum moved by a random perturbation that stays inside the eps contract.

    Each free coordinate shifts by at most κ = eps / max(‖c‖₁, max_j ‖A_j‖₁),
    then is clipped at zero, so the value moves by at most eps and every
    row by at most eps.
    """
    if eps_abs <= 0:
        raise LpError("eps must be positive")
    exact = solve_exact(lp)
    c, G, _, free = lp.leq_form()
    units = _approx_cost_units(lp.n_vars, G.shape[0], eps_abs)
    if exact.status != OPTIMAL:
        exact.cost_units = units
        return exact
    norms = [float(np.abs(c).sum())]
    if G.shape[0]:
        norms.append(float(np.abs(G).sum(axis=1).max()))
    kappa = eps_abs / max(max(norms), 1e-12)
    x = exact.x.copy()
    x[free] = np.clip(x[free] + kappa * rng.uniform(-1.0, 1.0, size=len(free)), 0.0, None)
    return LpSolution(
        x=x,
        value=lp.evaluate(x),
        status=APPROX,
        dual=exact.dual,
        feas_violation=max(0.0, lp.violation(x)),
        opt_gap_bound=eps_abs,
        cost_units=units,
        iterations=exact.iterations,
    )


def solve_lp(
    lp: LpProblem,
    mode: str,
    eps_scaled: float,
    factor: float,
    backend: str = "idealized",
    rng: np.random.Generator | None = None,
) -> LpSolution:
    """Single entry point used by the algorithms.

    ``exact`` runs the simplex. ``approx`` targets eps_scaled on the LP
    scaled by ``factor`` (eps_scaled·factor in original units) with either
    the idealized backend or the full game reduction.
    """
    if mode == "exact":
        return solve_exact(lp)
    if mode != "approx":
        raise LpError(f"unknown LP mode '{mode}'")
    if backend == "idealized":
        if rng is None:
            raise LpError("idealized approximate backend needs an rng")
        return solve_idealized_approx(lp, eps_scaled * factor, rng)
    if backend == "game":
        scaled, record = scale_for_approx(lp, factor)
        return unscale_solution(lp, solve_approx(scaled, eps_scaled), record)
    raise LpError(f"unknown approximate backend '{backend}'")


def feasible_sum_bound(lp: LpProblem) -> float:
    """Upper bound on Σx over the feasible set, from rows with all-positive coefficients.

    An LP file may carry it directly as ``scale``; otherwise the tightest
    rhs_j / min_k A_jk over such rows is used.
    """
    if lp.scale != 1.0:
        return lp.scale
    free = lp.free_vars
    bounds = [
        float(rhs) / float(row[free].min())
        for row, rhs in zip(lp.A, lp.rhs)
        if free and np.all(row[free] > 0)
    ]
    if not bounds:
        raise LpError("cannot bound the sum of the variables; set 'scale' in the LP file")
    return max(min(bounds), 1e-12)
