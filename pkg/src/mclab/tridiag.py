"""Periodic (cyclic) tridiagonal solves."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def solve_cyclic_tridiagonal(lower, diag, upper, rhs):
    """Solve a periodic tridiagonal system with constant coefficients.

    Row ``i`` reads ``lower*x[i-1] + diag*x[i] + upper*x[i+1] = rhs[i]`` with
    indices taken modulo ``n``.  ``rhs`` may be 1D or 2D (columns solved
    together).  Uses the Sherman-Morrison correction of the open tridiagonal
    system.
    """
    rhs = np.asarray(rhs)
    n = rhs.shape[0]
    if n < 3:
        raise ValueError("cyclic tridiagonal system needs n >= 3")
    dtype = np.result_type(rhs, lower, diag, upper, float)
    gamma = -diag if diag != 0 else -1.0
    ab = np.zeros((3, n), dtype=dtype)
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    ab[1, 0] = diag - gamma
    ab[1, -1] = diag - upper * lower / gamma

    u = np.zeros(n, dtype=dtype)
    u[0] = gamma
    u[-1] = upper
    cols = rhs.reshape(n, -1)
    sol = solve_banded((1, 1), ab, np.column_stack([cols, u]), check_finite=False)
    y, z = sol[:, :-1], sol[:, -1]
    # v = (1, 0, ..., 0, lower / gamma)
    vy = y[0] + (lower / gamma) * y[-1]
    vz = z[0] + (lower / gamma) * z[-1]
    x = y - np.outer(z, vy / (1.0 + vz))
    return x.reshape(rhs.shape)
