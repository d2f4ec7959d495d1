import math

import numpy as np
import pytest

from mclab.analysis import l1_error, moment_energies
from mclab.moment_algebra import DecayParameters
from mclab.reference import convergence_certificate, reference_solution
from mclab.solver import GaussianBump, Grid, SolverConfig

SLAB = DecayParameters(1.5, 1.5)
DESK = Grid(200)
CFG = SolverConfig()


@pytest.fixture(scope="module")
def ref51():
    return reference_solution(DESK, CFG, SLAB, GaussianBump(), 51, keep_full_state=True)


def test_reference_metadata(ref51):
    assert ref51.meta["reference"] and ref51.meta["n_ref"] == 51
    assert ref51.times == [0.0, 0.1, 0.2, 0.3, 0.4]


def test_reference_is_bit_deterministic(ref51):
    again = reference_solution(DESK, CFG, SLAB, GaussianBump(), 51)
    assert all(again.snapshots[t].tobytes() == ref51.snapshots[t].tobytes() for t in ref51.times)


def test_degenerate_reference_is_pure_decay():
    res = reference_solution(DESK, CFG, SLAB, GaussianBump(), 0)
    assert res.meta["degenerate"]
    u0 = GaussianBump()(DESK.centers)
    assert np.allclose(res.final(), u0 * math.exp(-1.5 * 0.4), rtol=1e-12)


def test_order_25_close_to_51(ref51):
    r25 = reference_solution(DESK, CFG, SLAB, GaussianBump(), 25)
    scale = np.abs(ref51.final()).sum() * DESK.dx
    assert l1_error(r25.final(), ref51.final(), DESK.dx) < 1e-4 * scale


def test_certificate_decreasing():
    table = convergence_certificate(DESK, CFG, SLAB, GaussianBump(), [11, 21, 31, 41, 51])
    dists = [d for _, d in table]
    assert [n for n, _ in table] == [11, 21, 31, 41]
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_certificate_rejects_duplicates():
    with pytest.raises(ValueError):
        convergence_certificate(DESK, CFG, SLAB, GaussianBump(), [1, 1])
    with pytest.raises(ValueError):
        convergence_certificate(DESK, CFG, SLAB, GaussianBump(), [3])


def test_certificate_absorption_only():
    table = convergence_certificate(Grid(50), SolverConfig(0.8, 0.2, ()), DecayParameters(2, 0),
                                    GaussianBump(), [3, 5])
    assert len(table) == 1 and 0 < table[0][1] < math.inf


def test_angular_energy_tail_is_converged(ref51):
    """The l in [40, 51] tail is physical: a P_71 run reproduces it."""
    e51 = moment_energies(ref51.full_state_snapshots[0.4].values, DESK.dx)
    r71 = reference_solution(DESK, CFG, SLAB, GaussianBump(), 71, keep_full_state=True)
    e71 = moment_energies(r71.full_state_snapshots[0.4].values, DESK.dx)
    frac51, frac71 = e51[40:].sum() / e51.sum(), e71[40:52].sum() / e71.sum()
    assert frac51 < 2e-6
    assert frac51 == pytest.approx(frac71, rel=0.01)
    assert np.all(np.diff(e51[:45]) < 0)


@pytest.mark.xfail(strict=True, reason="measured tail fraction is ~1.5e-6 at every resolution")
def test_angular_energy_tail_below_1e6_full_scale():
    g = Grid(1000)
    ref = reference_solution(g, CFG, SLAB, GaussianBump(), 51, keep_full_state=True)
    e = moment_energies(ref.full_state_snapshots[0.4].values, g.dx)
    assert e[40:].sum() / e.sum() < 1e-6
