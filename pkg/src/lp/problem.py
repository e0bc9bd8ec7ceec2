"""LP containers shared by the exact and approximate solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.utils.errors import LpError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
APPROX = "approx"


@dataclass
class LpProblem:
    """max objective·x + offset  s.t.  A x <= rhs,  geq_A x >= geq_rhs,  x >= 0,  x_k = 0 for pinned k."""

    objective: np.ndarray
    A: np.ndarray
    rhs: np.ndarray
    pinned_zero: frozenset = frozenset()
    geq_A: np.ndarray | None = None
    geq_rhs: np.ndarray | None = None
    offset: float = 0.0
    scale: float = 1.0
    family: str = "primal"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else np.zeros((len(self.rhs), 0))
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if self.A.shape[0] != self.rhs.size:
            raise LpError(f"A has {self.A.shape[0]} rows but rhs has {self.rhs.size}")
        if (self.geq_A is None) != (self.geq_rhs is None):
            raise LpError("geq_A and geq_rhs must be given together")
        if self.geq_A is not None:
            self.geq_rhs = np.asarray(self.geq_rhs, dtype=float).reshape(-1)
            self.geq_A = np.asarray(self.geq_A, dtype=float).reshape(-1, n)
            if self.geq_A.shape[0] != self.geq_rhs.size:
                raise LpError("geq_A and geq_rhs row counts differ")
        self.pinned_zero = frozenset(int(k) for k in self.pinned_zero)
        if any(k < 0 or k >= n for k in self.pinned_zero):
            raise LpError(f"pinned index out of range for {n} variables")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def free_vars(self) -> list[int]:
        return [k for k in range(self.n_vars) if k not in self.pinned_zero]

    def leq_form(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
        """Stacked <= system over the free variables: (c, G, h, free)."""
        free = self.free_vars
        G = self.A[:, free]
        h = self.rhs
        if self.geq_A is not None and self.geq_A.shape[0]:
            G = np.vstack([G, -self.geq_A[:, free]])
            h = np.concatenate([h, -self.geq_rhs])
        return self.objective[free], G, h, free

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n_vars)
        x[self.free_vars] = x_free
        return x

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.objective @ x) + self.offset

    def violation(self, x: np.ndarray) -> float:
        """Max positive residual over all constraints, pins and non-negativity."""
        x = np.asarray(x, dtype=float)
        residuals = [0.0]
        if self.A.shape[0]:
            residuals.append(float(np.max(self.A @ x - self.rhs)))
        if self.geq_A is not None and self.geq_A.shape[0]:
            residuals.append(float(np.max(self.geq_rhs - self.geq_A @ x)))
        if x.size:
            residuals.append(float(np.max(-x)))
        if self.pinned_zero:
            residuals.append(float(np.max(np.abs(x[sorted(self.pinned_zero)]))))
        return max(residuals)

    def to_dict(self) -> dict:
        payload = {
            "objective": self.objective.tolist(),
            "A": self.A.tolist(),
            "rhs": self.rhs.tolist(),
            "pins": sorted(self.pinned_zero),
        }
        if self.geq_A is not None:
            payload["geq_A"] = self.geq_A.tolist()
            payload["geq_rhs"] = self.geq_rhs.tolist()
        if self.scale != 1.0:
            payload["scale"] = self.scale
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "LpProblem":
        allowed = {"objective", "A", "rhs", "pins", "geq_A", "geq_rhs", "scale"}
        unknown = set(payload) - allowed
        if unknown:
            raise LpError(f"unknown LP keys: {sorted(unknown)}")
        for key in ("objective", "A", "rhs"):
            if key not in payload:
                raise LpError(f"LP file is missing '{key}'")
        return cls(
            objective=payload["objective"],
            A=payload["A"],
            rhs=payload["rhs"],
            pinned_zero=frozenset(payload.get("pins", [])),
            geq_A=payload.get("geq_A"),
            geq_rhs=payload.get("geq_rhs"),
            scale=float(payload.get("scale", 1.0)),
        )


@dataclass
class LpSolution:
    x: np.ndarray
    value: float
    status: str
    dual: np.ndarray | None = None
    feas_violation: float = 0.0
    opt_gap_bound: float = 0.0
    cost_units: dict = field(default_factory=dict)
    iterations: int = 0
    bisection_steps: int = 0
    dual_bound: float | None = None

    @property
    def solved(self) -> bool:
        return self.status in (OPTIMAL, APPROX)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "x": [float(v) for v in self.x],
            "value": float(self.value) if np.isfinite(self.value) else None,
            "dual": None if self.dual is None else [float(v) for v in self.dual],
            "feas_violation": float(self.feas_violation),
            "opt_gap_bound": float(self.opt_gap_bound),
            "cost_units": {k: float(v) for k, v in self.cost_units.items()},
            "iterations": int(self.iterations),
            "bisection_steps": int(self.bisection_steps),
            "dual_bound": None if self.dual_bound is None else float(self.dual_bound),
        }
