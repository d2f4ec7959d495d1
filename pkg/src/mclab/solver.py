"""Second-order staggered-grid time stepping on a periodic 1D domain.

One step of length ``dt`` is the symmetric splitting

    CN(dt/2) -> [decay(dt/2), transport(dt), decay(dt/2)] -> CN(dt/2)

where CN is a Crank-Nicolson step for ``f(t) D d2/dx2`` with ``f`` frozen at
the midpoint of the half step, transport is a staggered leapfrog (half kick of
the cell-centred fields, full kick of the edge fields, half kick again) and
decay is applied exactly through ``expm(-C dt/2)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from mclab.closures import SemiDiscreteSystem
from mclab.tridiag import solve_cyclic_tridiagonal

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Raised when a run produces non-finite values or a solve fails."""


@dataclass(frozen=True)
class Grid:
    cells: int
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.cells < 4:
            raise ValueError("grid needs at least 4 cells")
        if not self.b > self.a:
            raise ValueError("domain must satisfy a < b")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.cells) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.a + np.arange(self.cells) * self.dx

    def coordinates(self, placement: str) -> np.ndarray:
        return self.centers if placement == "center" else self.edges


@dataclass(frozen=True)
class GaussianBump:
    center: float = 0.5
    sharpness: float = 500.0
    amplitude: float = 1.0

    def __call__(self, x):
        return self.amplitude * np.exp(-self.sharpness * (np.asarray(x) - self.center) ** 2)


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 1.0

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value))


Profile = Callable[[np.ndarray], np.ndarray]


@dataclass
class MomentField:
    """Field values, shape ``(m, cells)``, with a placement per field."""

    values: np.ndarray
    placement: tuple[str, ...]

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def u0(self) -> np.ndarray:
        return self.values[0]

    def copy(self) -> "MomentField":
        return MomentField(self.values.copy(), self.placement)


@dataclass(frozen=True)
class SolverConfig:
    dt_factor: float = 0.8
    t_end: float = 0.4
    output_times: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)

    def __post_init__(self):
        object.__setattr__(self, "output_times", tuple(float(t) for t in self.output_times))
        if not 0 < self.dt_factor <= 1:
            raise ValueError("dt_factor must lie in (0, 1]")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if list(self.output_times) != sorted(self.output_times):
            raise ValueError("output_times must be sorted")
        if any(t < 0 or t > self.t_end for t in self.output_times):
            raise ValueError("output_times must lie in [0, t_end]")


@dataclass
class RunResult:
    x: np.ndarray
    snapshots: dict[float, np.ndarray]
    full_state_snapshots: Optional[dict[float, MomentField]] = None
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> list[float]:
        return sorted(self.snapshots)

    def final(self) -> np.ndarray:
        return self.snapshots[self.times[-1]]


def initialize(grid: Grid, system: SemiDiscreteSystem, profile: Profile) -> MomentField:
    """Sample ``profile`` into field 0; all other fields start at zero."""
    placement = system.placement()
    values = np.zeros((system.size, grid.cells))
    values[0] = profile(grid.coordinates(placement[0]))
    return MomentField(values, placement)


def _grad_to_centers(w):
    # edge values w[i] at x_i -> derivative at x_{i+1/2}
    return np.roll(w, -1, axis=-1) - w


def _grad_to_edges(w):
    # centre values w[i] at x_{i+1/2} -> derivative at x_i
    return w - np.roll(w, 1, axis=-1)


def _laplacian(w):
    return np.roll(w, 1, axis=-1) - 2.0 * w + np.roll(w, -1, axis=-1)


class Stepper:
    """Precomputed per-system data for repeated calls to :meth:`step`."""

    def __init__(self, system: SemiDiscreteSystem, grid: Grid):
        self.system = system
        self.grid = grid
        self.placement = system.placement()
        self.A = system.advection
        self.C = system.decay
        self.D = system.diffusion
        m = system.size
        centers = [k for k, p in enumerate(self.placement) if p == "center"]
        edges = [k for k, p in enumerate(self.placement) if p == "edge"]
        self.centers, self.edges = np.array(centers, int), np.array(edges, int)
        self._check_structure(m)
        self._decay_cache: dict[float, np.ndarray] = {}
        self._setup_diffusion()

    def _check_structure(self, m):
        A, C, D = self.A, self.C, self.D
        if not A.any():
            self.A_ce = self.A_ec = None
        elif not self.system.staggered:
            raise ValueError("advection requires a staggered system")
        else:
            c, e = self.centers, self.edges
            if A[np.ix_(c, c)].any() or A[np.ix_(e, e)].any():
                raise ValueError("advection must only couple centre and edge fields")
            self.A_ce = A[np.ix_(c, e)]
            self.A_ec = A[np.ix_(e, c)]
        same = np.array([[p == q for q in self.placement] for p in self.placement])
        if (C[~same] != 0).any() or (D[~same] != 0).any():
            raise ValueError("decay and diffusion may not couple centre and edge fields")

    def _setup_diffusion(self):
        D = self.D
        self.diffusive = bool(D.any())
        self.diag_diffusion = not (D - np.diag(np.diag(D))).any()
        if not self.diffusive or self.diag_diffusion:
            return
        lam, V = np.linalg.eig(D)
        if np.linalg.cond(V) > 1e8:
            raise SolverError("diffusion matrix is not safely diagonalizable")
        if np.abs(lam.imag).max() == 0.0:
            lam, V = lam.real, V.real
        self.eig, self.V, self.Vinv = lam, V, np.linalg.inv(V)

    def decay_factor(self, h: float) -> np.ndarray:
        E = self._decay_cache.get(h)
        if E is None:
            E = expm(-self.C * h)
            self._decay_cache[h] = E
        return E

    def crank_nicolson(self, w: np.ndarray, t_mid: float, h: float) -> np.ndarray:
        if not self.diffusive:
            return w
        f = self.system.schedule(t_mid)
        if f == 0.0:
            return w
        scale = 0.5 * h * f / self.grid.dx ** 2
        if self.diag_diffusion:
            out = w.copy()
            for k in np.flatnonzero(np.diag(self.D)):
                r = scale * self.D[k, k]
                rhs = w[k] + r * _laplacian(w[k])
                out[k] = solve_cyclic_tridiagonal(-r, 1.0 + 2.0 * r, -r, rhs)
            return out
        z = self.Vinv @ w
        for j, lam in enumerate(self.eig):
            r = scale * lam
            if r == 0:
                continue
            rhs = z[j] + r * _laplacian(z[j])
            z[j] = solve_cyclic_tridiagonal(-r, 1.0 + 2.0 * r, -r, rhs)
        out = self.V @ z
        return np.real(out) if np.iscomplexobj(out) else out

    def transport(self, w: np.ndarray, h: float) -> np.ndarray:
        if self.A_ce is None:
            return w
        w = w.copy()
        c, e = self.centers, self.edges
        k = h / self.grid.dx
        w[c] -= 0.5 * k * (self.A_ce @ _grad_to_centers(w[e]))
        w[e] -= k * (self.A_ec @ _grad_to_edges(w[c]))
        w[c] -= 0.5 * k * (self.A_ce @ _grad_to_centers(w[e]))
        return w

    def add_source(self, w: np.ndarray, t: float, h: float) -> np.ndarray:
        src = self.system.source
        if src is None:
            return w
        w = w.copy()
        q = np.asarray(src(self.grid.centers, t), dtype=float)
        for row in self.system.source_rows:
            w[row] += h * q
        return w

    def step(self, w: np.ndarray, t: float, dt: float) -> np.ndarray:
        if not dt > 0:
            raise ValueError("dt must be > 0")
        E = self.decay_factor(0.5 * dt)
        w = self.crank_nicolson(w, t + 0.25 * dt, 0.5 * dt)
        w = E @ w
        w = self.add_source(w, t + 0.5 * dt, 0.5 * dt)
        w = self.transport(w, dt)
        w = self.add_source(w, t + 0.5 * dt, 0.5 * dt)
        w = E @ w
        w = self.crank_nicolson(w, t + 0.75 * dt, 0.5 * dt)
        return w


def advance(
    system: SemiDiscreteSystem,
    state: MomentField,
    t: float,
    dt: float,
    grid: Optional[Grid] = None,
) -> MomentField:
    """One full step of length ``dt`` starting at time ``t``."""
    grid = grid or Grid(state.values.shape[1])
    if state.size != system.size:
        raise ValueError("state does not match system size")
    w = Stepper(system, grid).step(state.values, t, dt)
    if not np.isfinite(w).all():
        raise SolverError(f"non-finite values after step at t={t:g}")
    return MomentField(w, state.placement)


def _targets(config: SolverConfig) -> list[float]:
    return sorted({0.0, *config.output_times, float(config.t_end)})


def run(
    system: SemiDiscreteSystem,
    grid: Grid,
    config: SolverConfig,
    profile: Profile,
    keep_full_state: bool = False,
    sample_times: Sequence[float] = (),
) -> RunResult:
    """Integrate from ``t = 0`` to ``t_end``, landing exactly on every output time.

    ``sample_times`` adds extra snapshot times on top of ``config.output_times``.
    """
    state = initialize(grid, system, profile)
    stepper = Stepper(system, grid)
    dt = config.dt_factor * grid.dx
    targets = sorted(set(_targets(config)) | {float(s) for s in sample_times})
    if targets[-1] > config.t_end:
        raise ValueError("sample times exceed t_end")

    w = state.values
    snapshots = {0.0: w[0].copy()}
    full = {0.0: MomentField(w.copy(), state.placement)} if keep_full_state else None
    t, steps = 0.0, 0
    for target in targets[1:]:
        span = target - t
        # tolerate float noise in the number of whole steps
        nsteps = max(1, math.ceil(span / dt - 1e-9))
        t0 = t
        for i in range(nsteps):
            t_next = target if i == nsteps - 1 else t0 + (i + 1) * dt
            try:
                w = stepper.step(w, t, t_next - t)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SolverError(f"step {steps} at t={t:g} failed: {exc}") from exc
            steps += 1
            if not np.isfinite(w).all():
                raise SolverError(f"non-finite values at step {steps}, t={t_next:g}")
            t = t_next
        snapshots[target] = w[0].copy()
        if full is not None:
            full[target] = MomentField(w.copy(), state.placement)

    meta = {
        "closure": system.descriptor.label,
        "cells": grid.cells,
        "domain": (grid.a, grid.b),
        "dt": dt,
        "dt_factor": config.dt_factor,
        "t_end": config.t_end,
        "steps": steps,
        "kappa": float(system.decay_parameters.kappa),
        "sigma": float(system.decay_parameters.sigma),
    }
    log.debug("run %s: %d steps", meta["closure"], steps)
    return RunResult(grid.centers.copy(), snapshots, full, meta)
