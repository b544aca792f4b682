"""Independent reference solvers used only by the test suite."""

import numpy as np
from scipy.optimize import linprog


def l1_min_oracle(theta: np.ndarray, z: np.ndarray, radius: float) -> float:
    """Optimal l1 objective of min ||s||_1 s.t. ||theta s - z|| <= radius.

    radius=0 goes through an exact LP (split positive/negative parts,
    HiGHS); positive radius through a conic solve (cvxpy).  Both are
    library routes independent of the package's iterative decoder.
    """
    m, n = theta.shape
    if radius == 0.0:
        res = linprog(
            np.ones(2 * n),
            A_eq=np.hstack([theta, -theta]),
            b_eq=z,
            bounds=[(0, None)] * (2 * n),
            method="highs",
        )
        if not res.success:
            raise RuntimeError(f"LP oracle failed: {res.message}")
        return float(res.fun)
    import cvxpy as cp

    s = cp.Variable(n)
    problem = cp.Problem(cp.Minimize(cp.norm1(s)), [cp.norm2(theta @ s - z) <= radius])
    problem.solve(solver=cp.CLARABEL)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"conic oracle failed: {problem.status}")
    return float(problem.value)
