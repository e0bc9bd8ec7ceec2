"""Ground-truth LP quantities of an instance: OPT_LP, ξ*, η*, index sets, δ, σ, χ."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.config.constants import CLASSIFY_TOL
from src.lp.families import arm_removed_lp, constraint_augmented_lp, primal_lp
from src.lp.problem import OPTIMAL, LpProblem, LpSolution
from src.lp.simplex import solve_exact
from src.model.instance import BwkInstance
from src.utils.errors import InvariantViolation

UNIQUENESS_SEED = 20240601
PERTURBATION = 1e-7


@dataclass(frozen=True)
class GroundTruth:
    T: int
    B: float
    r: np.ndarray
    C: np.ndarray
    opt_lp: float
    xi_star: np.ndarray
    eta_star: np.ndarray
    opt_i: np.ndarray
    opt_j: np.ndarray
    I_star: tuple
    I_prime: tuple
    J_star: tuple
    J_prime: tuple
    delta: float | None
    sigma: float
    chi: float | None
    unique: bool
    nondegenerate: bool

    @property
    def m(self) -> int:
        return self.r.size

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def b(self) -> float:
        return self.B / self.T

    def reduced_costs(self) -> np.ndarray:
        """Δ_i = C_{·,i}·η* − r_i (zero on optimal arms)."""
        return self.C.T @ self.eta_star - self.r

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "B": self.B,
            "b": self.b,
            "m": self.m,
            "d": self.d,
            "opt_lp": self.opt_lp,
            "xi_star": self.xi_star.tolist(),
            "eta_star": self.eta_star.tolist(),
            "opt_i": self.opt_i.tolist(),
            "opt_j": self.opt_j.tolist(),
            "I_star": list(self.I_star),
            "I_prime": list(self.I_prime),
            "J_star": list(self.J_star),
            "J_prime": list(self.J_prime),
            "delta": self.delta,
            "sigma": self.sigma,
            "chi": self.chi,
            "nondegenerate": self.nondegenerate,
        }


def classify(xi_star, C, B, tol: float = CLASSIFY_TOL) -> tuple[tuple, tuple, tuple, tuple]:
    """Splits arms by ξ* > 0 and resources by zero slack: (I*, I', J*, J')."""
    xi_star = np.asarray(xi_star, dtype=float)
    C = np.asarray(C, dtype=float)
    budget = np.broadcast_to(np.asarray(B, dtype=float), (C.shape[0],))
    scale = max(1.0, float(np.max(np.abs(budget))) if budget.size else 1.0)
    positive = xi_star > tol * scale
    slack = budget - C @ xi_star
    binding = np.abs(slack) <= tol * scale
    I_star = tuple(int(i) for i in np.flatnonzero(positive))
    I_prime = tuple(int(i) for i in np.flatnonzero(~positive))
    J_star = tuple(int(j) for j in np.flatnonzero(binding))
    J_prime = tuple(int(j) for j in np.flatnonzero(~binding))
    return I_star, I_prime, J_star, J_prime


def _is_unique(r, C, B, xi_star, solver, T) -> bool:
    """Perturbs the objective in opposite directions; a tie between vertices shows up as a jump."""
    rng = np.random.default_rng(UNIQUENESS_SEED)
    direction = rng.uniform(-1.0, 1.0, size=r.size) * PERTURBATION * max(1.0, float(np.abs(r).max()))
    for sign in (1.0, -1.0):
        solution = solver(primal_lp(r + sign * direction, C, B))
        if solution.status != OPTIMAL:
            return False
        if float(np.max(np.abs(solution.x - xi_star))) > CLASSIFY_TOL * max(1.0, float(T)):
            return False
    return True


def compute_ground_truth(
    instance: BwkInstance,
    exact_lp: Callable[[LpProblem], LpSolution] = solve_exact,
) -> GroundTruth:
    """Solves the primal, the arm-removed and constraint-augmented LPs and derives δ, σ, χ.

    Degenerate instances come back with ``nondegenerate=False``.
    """
    r = instance.mean_rewards
    C = instance.mean_costs
    B, T = instance.B, instance.T

    primal = exact_lp(primal_lp(r, C, B))
    if primal.status != OPTIMAL:
        raise InvariantViolation(f"primal LP of a valid instance returned '{primal.status}'")
    xi_star, opt_lp = primal.x, primal.value
    eta_star = np.clip(primal.dual[: C.shape[0]], 0.0, None)

    opt_i = np.array([exact_lp(arm_removed_lp(r, C, B, i)).value for i in range(instance.m)])
    opt_j = np.array([exact_lp(constraint_augmented_lp(r, C, B, j)).value for j in range(instance.d)])

    I_star, I_prime, J_star, J_prime = classify(xi_star, C, B)

    competitors = [opt_i[i] for i in I_star] + [opt_j[j] for j in J_prime]
    delta = None
    if I_star and competitors:
        delta = (opt_lp - max(competitors)) / T

    chi = float(xi_star[list(I_star)].min() / T) if I_star else None
    sigma = 0.0
    if I_star and J_star:
        sigma = float(np.linalg.svd(C[np.ix_(J_star, I_star)], compute_uv=False).min())

    unique = _is_unique(r, C, B, xi_star, exact_lp, T)
    nondegenerate = bool(
        I_star
        and len(I_star) == len(J_star)
        and unique
        and sigma > 1e-12
        and delta is not None
        and delta > 0
    )
    return GroundTruth(
        T=T,
        B=B,
        r=r,
        C=C,
        opt_lp=float(opt_lp),
        xi_star=xi_star,
        eta_star=eta_star,
        opt_i=opt_i,
        opt_j=opt_j,
        I_star=I_star,
        I_prime=I_prime,
        J_star=J_star,
        J_prime=J_prime,
        delta=delta,
        sigma=sigma,
        chi=chi,
        unique=unique,
        nondegenerate=nondegenerate,
    )
