"""Recompute the canonical instance's ground truth by vertex enumeration, without src/."""
import itertools
import json
import sys

import numpy as np

T, B = 100.0, 50.0
R = np.array([0.9, 0.5])
C = np.array([[0.5, 0.5], [1.0, 0.2]])

EXPECTED = {
    "opt_lp": 65.0,
    "xi_star": [37.5, 62.5],
    "opt_i": [50.0, 45.0],
    "delta": 0.15,
    "chi": 0.375,
    "sigma": 0.3347,
}


def best_vertex(objective, A, rhs, pinned=()):
    """max objective·x over {A x <= rhs, x >= 0, x_k = 0 for pinned k} by brute force."""
    n = objective.size
    rows = [(A[j], rhs[j]) for j in range(A.shape[0])]
    rows += [(-np.eye(n)[k], 0.0) for k in range(n)]
    equalities = [np.eye(n)[k] for k in pinned]
    best_value, best_x = -np.inf, None
    for subset in itertools.combinations(range(len(rows)), n - len(equalities)):
        M = np.array([rows[i][0] for i in subset] + equalities)
        v = np.array([rows[i][1] for i in subset] + [0.0] * len(equalities))
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, v)
        if np.any(A @ x > rhs + 1e-9) or np.any(x < -1e-9):
            continue
        value = float(objective @ x)
        if value > best_value:
            best_value, best_x = value, x
    return best_value, best_x


def main():
    budget = np.full(C.shape[0], B)
    opt, xi = best_vertex(R, C, budget)
    opt_i = [best_vertex(R, C, budget, pinned=(i,))[0] for i in range(R.size)]
    delta = (opt - max(opt_i)) / T
    chi = float(xi.min() / T)
    sigma = float(np.linalg.svd(C, compute_uv=False).min())
    result = {
        "opt_lp": opt,
        "xi_star": xi.tolist(),
        "opt_i": opt_i,
        "delta": delta,
        "chi": chi,
        "sigma": sigma,
    }
    print(json.dumps(result, indent=2, sort_keys=True))

    ok = (
        abs(opt - EXPECTED["opt_lp"]) < 1e-9
        and np.allclose(xi, EXPECTED["xi_star"])
        and np.allclose(opt_i, EXPECTED["opt_i"])
        and abs(delta - EXPECTED["delta"]) < 1e-9
        and abs(chi - EXPECTED["chi"]) < 1e-9
        and abs(sigma - EXPECTED["sigma"]) < 1e-3
    )
    print("canonical ground truth: OK" if ok else "canonical ground truth: MISMATCH")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
