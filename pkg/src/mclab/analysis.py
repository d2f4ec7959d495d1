"""Error norms between runs and angular norm diagnostics."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from mclab.solver import RunResult

ABSOLUTE = "absolute"
SIGNED = "signed"


def l1_error(approx, reference, dx: float, mode: str = ABSOLUTE) -> float:
    """Discrete L1 error ``sum |a - r| dx``; ``signed`` drops the absolute value."""
    a = np.asarray(approx, dtype=float)
    r = np.asarray(reference, dtype=float)
    if a.shape != r.shape:
        raise ValueError(f"profile length mismatch: {a.shape} vs {r.shape}")
    diff = a - r
    if mode == ABSOLUTE:
        return float(np.abs(diff).sum() * dx)
    if mode == SIGNED:
        return float(diff.sum() * dx)
    raise ValueError(f"unknown error mode {mode!r}")


def _dx(run: RunResult) -> float:
    x = run.x
    return float(x[1] - x[0])


def error_time_series(
    approx: RunResult, reference: RunResult, sample_times: Iterable[float] | None = None
) -> list[tuple[float, float, float]]:
    """``(t, e_abs, e_signed)`` of ``u0`` at each sample time."""
    if approx.x.shape != reference.x.shape or not np.allclose(approx.x, reference.x):
        raise ValueError("runs are on different grids")
    times = approx.times if sample_times is None else list(sample_times)
    dx = _dx(approx)
    out = []
    for t in times:
        if t not in approx.snapshots or t not in reference.snapshots:
            raise ValueError(f"no snapshot at t={t:g} in both runs")
        a, r = approx.snapshots[t], reference.snapshots[t]
        out.append((t, l1_error(a, r, dx, ABSOLUTE), l1_error(a, r, dx, SIGNED)))
    return out


def angular_l2_norm(moments: Sequence[float]) -> float:
    """``sum_l (2l+1)/2 u_l^2`` for the moments at one point."""
    u = np.asarray(moments, dtype=float)
    weights = (2 * np.arange(u.size) + 1) / 2
    return float(np.sum(weights * u * u))


def moment_energies(values: np.ndarray, dx: float) -> np.ndarray:
    """Per-moment contribution ``(2l+1)/2 ||u_l||^2`` integrated over space."""
    weights = (2 * np.arange(values.shape[0]) + 1) / 2
    return weights * (values ** 2).sum(axis=1) * dx
