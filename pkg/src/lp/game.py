"""Zero-sum game form of a scaled LP and a multiplicative-weights solver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.lp.problem import LpProblem
from src.lp.simplex import solve_exact
from src.utils.errors import LpError


@dataclass(frozen=True)
class GameMatrix:
    """Block matrix for the feasibility question "is there ξ with Σξ = 1, r·ξ >= α, Cξ <= b?".

    Rows: [e | 1 | -1], [-e | 1 | 1], [-r | 0 | α], [C | 0 | -b].
    The game value is <= 0 exactly when such a ξ exists.
    """

    entries: np.ndarray
    alpha: float
    n_vars: int
    n_rows: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def blocks(self) -> dict:
        """Recovers (r, C, b, α) from the entries."""
        n = self.n_vars
        return {
            "objective": -self.entries[2, :n],
            "A": self.entries[3:, :n],
            "rhs": -self.entries[3:, n + 1],
            "alpha": float(self.entries[2, n + 1]),
        }


def _check_unit_range(name: str, values: np.ndarray) -> None:
    if values.size and float(np.max(np.abs(values))) > 1.0 + 1e-12:
        raise LpError(f"{name} has entries outside [-1, 1]")


def game_from_arrays(objective: np.ndarray, A: np.ndarray, rhs: np.ndarray, alpha: float) -> GameMatrix:
    if not -1.0 <= alpha <= 1.0:
        raise LpError(f"alpha {alpha} outside [-1, 1]")
    objective = np.asarray(objective, dtype=float)
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    for name, values in (("objective", objective), ("A", A), ("rhs", rhs)):
        _check_unit_range(name, values)
    k, n = A.shape
    entries = np.zeros((k + 3, n + 2))
    entries[0, :n], entries[0, n], entries[0, n + 1] = 1.0, 1.0, -1.0
    entries[1, :n], entries[1, n], entries[1, n + 1] = -1.0, 1.0, 1.0
    entries[2, :n], entries[2, n + 1] = -objective, alpha
    entries[3:, :n], entries[3:, n + 1] = A, -rhs
    return GameMatrix(entries=entries, alpha=float(alpha), n_vars=n, n_rows=k)


def build_game(lp_scaled: LpProblem, alpha: float) -> GameMatrix:
    """Game matrix of a scaled LP (pins deleted, >= rows negated)."""
    c, G, h, _ = lp_scaled.leq_form()
    return game_from_arrays(c, G, h, alpha)


@dataclass
class GameRun:
    x: np.ndarray
    y: np.ndarray
    upper: float
    lower: float
    iterations: int

    @property
    def value(self) -> float:
        return 0.5 * (self.upper + self.lower)

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def _softmax(logits: np.ndarray) -> np.ndarray:
    w = np.exp(logits - logits.max())
    return w / w.sum()


def play_zero_sum(
    A: np.ndarray,
    step_size: float,
    max_iter: int,
    *,
    optimistic: bool = False,
    target_gap: float = 0.0,
    stop: Callable[[float, float], bool] | None = None,
    check_every: int = 8,
) -> GameRun:
    """Multiplicative-weights self-play on A (row player maximizes x·A y).

    Averaged iterates give the certificate lower <= v* <= upper with
    upper = max_i (A ȳ)_i and lower = min_j (x̄ A)_j. Play stops at
    ``max_iter``, when the gap reaches ``target_gap``, or when ``stop``
    returns True on (upper, lower).
    """
    A = np.asarray(A, dtype=float)
    rows, cols = A.shape
    log_x = np.zeros(rows)
    log_y = np.zeros(cols)
    x_sum = np.zeros(rows)
    y_sum = np.zeros(cols)
    prev_gx = np.zeros(rows)
    prev_gy = np.zeros(cols)
    upper, lower = np.inf, -np.inf
    iteration = 0
    for iteration in range(1, max_iter + 1):
        x = _softmax(log_x)
        y = _softmax(log_y)
        x_sum += x
        y_sum += y
        gx = A @ y
        gy = x @ A
        if optimistic:
            log_x += step_size * (2.0 * gx - prev_gx)
            log_y -= step_size * (2.0 * gy - prev_gy)
            prev_gx, prev_gy = gx, gy
        else:
            log_x += step_size * gx
            log_y -= step_size * gy
        log_x -= log_x.max()
        log_y -= log_y.max()
        if iteration % check_every == 0 or iteration == max_iter:
            upper = float(np.max(A @ (y_sum / iteration)))
            lower = float(np.min((x_sum / iteration) @ A))
            if upper - lower <= target_gap:
                break
            if stop is not None and stop(upper, lower):
                break
    return GameRun(
        x=x_sum / max(iteration, 1),
        y=y_sum / max(iteration, 1),
        upper=upper,
        lower=lower,
        iterations=iteration,
    )


def mw_iteration_cap(rows: int, cols: int, eps_game: float) -> int:
    return int(math.ceil(16.0 * math.log(rows + cols) / eps_game**2))


def solve_zero_sum_mw(A: np.ndarray, eps_game: float) -> tuple[np.ndarray, np.ndarray, float]:
    """eps_game-approximate equilibrium of the matrix game A with entries in [-1, 1].

    Plain multiplicative weights with step eps_game/2 for at most
    ceil(16 ln(rows+cols) / eps_game^2) rounds, returning averaged
    strategies. Play ends early once the duality gap of the averages is
    certified below eps_game.

    Returns:
        (x_row, y_col, value_estimate)
    """
    if eps_game <= 0:
        raise LpError("eps_game must be positive")
    A = np.asarray(A, dtype=float)
    run = play_zero_sum(
        A,
        step_size=eps_game / 2.0,
        max_iter=mw_iteration_cap(*A.shape, eps_game),
        target_gap=eps_game,
    )
    return run.x, run.y, run.value


def exact_game_value(A: np.ndarray) -> float:
    """min_y max_i (A y)_i via the LP  max Σw  s.t. (A + s) w <= 1."""
    A = np.asarray(A, dtype=float)
    shift = 1.0 - float(A.min())
    shifted = A + shift
    lp = LpProblem(objective=np.ones(A.shape[1]), A=shifted, rhs=np.ones(A.shape[0]))
    solution = solve_exact(lp)
    return 1.0 / solution.value - shift
