"""Large-N P_N runs used as the true solution, plus a convergence certificate."""
from __future__ import annotations

import logging
from typing import Sequence

from mclab.analysis import l1_error
from mclab.closures import ClosureDescriptor, Family, assemble
from mclab.moment_algebra import DecayParameters
from mclab.solver import Grid, Profile, RunResult, SolverConfig, run

log = logging.getLogger(__name__)

DEFAULT_REFERENCE_ORDER = 51


def reference_solution(
    grid: Grid,
    config: SolverConfig,
    decay: DecayParameters,
    profile: Profile,
    n_ref: int = DEFAULT_REFERENCE_ORDER,
    sample_times: Sequence[float] = (),
    keep_full_state: bool = False,
) -> RunResult:
    if n_ref < 0:
        raise ValueError("n_ref must be >= 0")
    if n_ref == 0:
        log.warning("P_0 reference has no transport; it is pure exponential decay")
    system = assemble(ClosureDescriptor(Family.PN, n_ref), decay)
    result = run(system, grid, config, profile, keep_full_state, sample_times)
    result.meta.update(reference=True, n_ref=n_ref, degenerate=n_ref == 0)
    return result


def convergence_certificate(
    grid: Grid,
    config: SolverConfig,
    decay: DecayParameters,
    profile: Profile,
    orders: Sequence[int],
) -> list[tuple[int, float]]:
    """L1 distance of ``u0`` at ``t_end`` between runs of successive orders.

    Entry ``i`` is ``(orders[i], ||u0(orders[i]) - u0(orders[i+1])||_1)``.
    """
    orders = list(orders)
    if len(orders) < 2:
        raise ValueError("need at least two orders")
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("orders must be strictly ascending")
    finals = [
        reference_solution(grid, config, decay, profile, n).final() for n in orders
    ]
    return [
        (n, l1_error(finals[i], finals[i + 1], grid.dx))
        for i, n in enumerate(orders[:-1])
    ]
