"""Moment closures for slab-geometry radiative transfer.

P_N, diffusion correction, crescendo diffusion, reordered P_N and SP3/SSP3
closures, reduced to one semi-discrete normal form and solved on a periodic
staggered grid.
"""
from mclab.closures import (
    ClosureDescriptor,
    CrescendoMode,
    Family,
    SemiDiscreteSystem,
    assemble,
    crescendo_coefficient,
)
from mclab.moment_algebra import DecayParameters, diffusion_matrix, theta, triple_product
from mclab.solver import GaussianBump, Grid, RunResult, SolverConfig, SolverError, run

__all__ = [
    "ClosureDescriptor",
    "CrescendoMode",
    "DecayParameters",
    "Family",
    "GaussianBump",
    "Grid",
    "RunResult",
    "SemiDiscreteSystem",
    "SolverConfig",
    "SolverError",
    "assemble",
    "crescendo_coefficient",
    "diffusion_matrix",
    "run",
    "theta",
    "triple_product",
]
