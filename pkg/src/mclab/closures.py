"""Closure descriptors and their reduction to a common semi-discrete normal form.

Every closure is written as

    dw/dt = -A dw/dx - C w + f(t) D d2w/dx2 + s(x, t)

with constant matrices ``A``, ``C``, ``D`` and a crescendo schedule ``f``
saturating at ``tau = 1/(kappa+sigma)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from mclab import moment_algebra as ma

DEFAULT_ALPHA = Fraction(1, 3)
MAX_ALPHA = Fraction(9, 10)


class Family(str, enum.Enum):
    PN = "pn"
    DIFFUSION_CORRECTION = "diffcorr"
    RPN = "rpn"
    SP3 = "sp3"
    SSP3 = "ssp3"


class CrescendoMode(str, enum.Enum):
    CONSTANT = "constant"
    TRUNCATED = "truncated"
    MODIFIED = "modified"


_QUADRATURE_NAMES = {
    CrescendoMode.CONSTANT: "piecewise constant quadrature",
    CrescendoMode.TRUNCATED: "truncated piecewise constant quadrature",
    CrescendoMode.MODIFIED: "modified piecewise constant quadrature",
}

_QUADRATURE_FORMULAS = {
    CrescendoMode.CONSTANT: "f(t) = tau",
    CrescendoMode.TRUNCATED: "f(t) = min(tau, t)",
    CrescendoMode.MODIFIED: "f(t) = tau (1 - exp(-t/tau))",
}


def crescendo_coefficient(mode: CrescendoMode, t: float, tau: float) -> float:
    """Memory-integral weight ``f(t)``; ``0 <= f <= tau`` and nondecreasing."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    mode = CrescendoMode(mode)
    if mode is CrescendoMode.CONSTANT:
        return float(tau)
    if mode is CrescendoMode.TRUNCATED:
        return float(min(tau, t))
    return float(-tau * math.expm1(-t / tau))


@dataclass(frozen=True)
class ClosureDescriptor:
    family: Family
    order: int = 0
    crescendo: Optional[CrescendoMode] = None
    alpha: Fraction = DEFAULT_ALPHA

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.crescendo is not None:
            object.__setattr__(self, "crescendo", CrescendoMode(self.crescendo))
        object.__setattr__(self, "alpha", ma.as_rational(self.alpha))
        fam = self.family
        if self.order < 0:
            raise ValueError("closure order must be >= 0")
        if fam in (Family.DIFFUSION_CORRECTION, Family.RPN):
            if self.crescendo is None:
                object.__setattr__(self, "crescendo", CrescendoMode.CONSTANT)
        elif self.crescendo is not None:
            raise ValueError(f"{fam.value} takes no crescendo mode")
        if fam in (Family.SP3, Family.SSP3):
            object.__setattr__(self, "order", 3)
            if not 0 < self.alpha <= MAX_ALPHA:
                raise ValueError(f"alpha must lie in (0, 0.9], got {self.alpha}")

    @classmethod
    def parse(cls, text: str) -> "ClosureDescriptor":
        """Parse ``family[:N][:crescendo]``, e.g. ``diffcorr:3:modified``."""
        parts = [p.strip().lower() for p in text.strip().split(":")]
        try:
            family = Family(parts[0])
        except ValueError:
            raise ValueError(f"unknown closure family {parts[0]!r} in {text!r}") from None
        rest = parts[1:]
        if family in (Family.SP3, Family.SSP3):
            if rest:
                raise ValueError(f"{family.value} takes no order or crescendo: {text!r}")
            return cls(family)
        if not rest or not rest[0].isdigit():
            raise ValueError(f"closure {text!r} needs a non-negative integer order")
        order = int(rest[0])
        crescendo = None
        if len(rest) == 2:
            try:
                crescendo = CrescendoMode(rest[1])
            except ValueError:
                raise ValueError(f"unknown crescendo mode {rest[1]!r} in {text!r}") from None
            if family is Family.PN:
                raise ValueError(f"pn takes no crescendo mode: {text!r}")
        elif len(rest) > 2:
            raise ValueError(f"too many fields in closure {text!r}")
        return cls(family, order, crescendo)

    @property
    def label(self) -> str:
        """Canonical grammar string; constant crescendo is left implicit."""
        fam = self.family
        if fam in (Family.SP3, Family.SSP3):
            return fam.value
        label = f"{fam.value}:{self.order}"
        if self.crescendo not in (None, CrescendoMode.CONSTANT):
            label += f":{self.crescendo.value}"
        return label

    def __str__(self) -> str:
        return self.label


Source = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class SemiDiscreteSystem:
    """Assembled normal-form operators, exact and as floats."""

    descriptor: ClosureDescriptor
    decay_parameters: ma.DecayParameters
    advection_exact: np.ndarray = field(repr=False)
    decay_exact: np.ndarray = field(repr=False)
    diffusion_exact: np.ndarray = field(repr=False)
    field_names: tuple[str, ...]
    staggered: bool
    source: Optional[Source] = field(default=None, repr=False)
    source_rows: tuple[int, ...] = (0,)

    @property
    def size(self) -> int:
        return len(self.field_names)

    @property
    def tau(self) -> float:
        return float(self.decay_parameters.tau)

    @property
    def mode(self) -> CrescendoMode:
        return self.descriptor.crescendo or CrescendoMode.CONSTANT

    @property
    def advection(self) -> np.ndarray:
        return ma.to_float(self.advection_exact)

    @property
    def decay(self) -> np.ndarray:
        return ma.to_float(self.decay_exact)

    @property
    def diffusion(self) -> np.ndarray:
        return ma.to_float(self.diffusion_exact)

    def schedule(self, t: float) -> float:
        return crescendo_coefficient(self.mode, t, self.tau)

    def placement(self) -> tuple[str, ...]:
        """``center`` or ``edge`` per field; odd fields sit on edges if staggered."""
        if not self.staggered:
            return ("center",) * self.size
        return tuple("edge" if k % 2 else "center" for k in range(self.size))

    def operators_equal(self, other: "SemiDiscreteSystem") -> bool:
        pairs = [
            (self.advection_exact, other.advection_exact),
            (self.decay_exact, other.decay_exact),
            (self.diffusion_exact, other.diffusion_exact),
        ]
        return all(
            a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))
            for a, b in pairs
        ) and self.mode == other.mode


def _sp3_diffusion(alpha: Fraction, with_zeta: bool) -> np.ndarray:
    """SP3 diffusion matrix times sigma_t; the ``1/sigma_t`` goes into ``f = tau``."""
    a = alpha
    third = Fraction(1, 3)
    if with_zeta:
        rows = [
            [third, 2 * third, -third],
            [Fraction(2, 45) / a, Fraction(11, 63) / a, Fraction(0)],
            [third, 2 * third, (Fraction(12, 5) * (1 - a) - 1) * third],
        ]
    else:
        rows = [
            [third, 2 * third],
            [Fraction(2, 45) / a, Fraction(11, 63) / a],
        ]
    out = ma.zeros(len(rows))
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = Fraction(v)
    return out


def assemble(
    descriptor: ClosureDescriptor,
    decay: ma.DecayParameters,
    source: Optional[Source] = None,
) -> SemiDiscreteSystem:
    """Reduce a closure descriptor to its normal-form operators."""
    fam = descriptor.family
    N = descriptor.order
    if fam in (Family.PN, Family.DIFFUSION_CORRECTION):
        n = N + 1
        b, _ = ma.build_truncated_operators(n, decay)
        d = ma.zeros(n)
        if fam is Family.DIFFUSION_CORRECTION:
            d[N, N] = ma.theta(N)
        return SemiDiscreteSystem(
            descriptor, decay, b.entries, decay.matrix(n), d,
            tuple(f"u{k}" for k in range(n)), staggered=n > 1, source=source,
        )
    if fam is Family.RPN:
        n = N + 1
        return SemiDiscreteSystem(
            descriptor, decay, ma.zeros(n), decay.matrix(n),
            ma.diffusion_matrix(N, ma.EVEN_ODD).entries,
            tuple(f"u{2 * k}" for k in range(n)), staggered=False, source=source,
        )
    alpha = descriptor.alpha
    sigma_a, sigma_t = decay.kappa, decay.total
    if fam is Family.SP3:
        c = ma.zeros(3)
        c[0, 0] = sigma_a
        c[1, 1] = sigma_t / (3 * alpha)
        c[2, 0] = sigma_a
        c[2, 2] = sigma_t
        return SemiDiscreteSystem(
            descriptor, decay, ma.zeros(3), c, _sp3_diffusion(alpha, True),
            ("phi", "phi2", "zeta"), staggered=False, source=source,
            source_rows=(0, 2),
        )
    c = ma.zeros(2)
    c[0, 0] = sigma_a
    c[1, 1] = sigma_t / (3 * alpha)
    return SemiDiscreteSystem(
        descriptor, decay, ma.zeros(2), c, _sp3_diffusion(alpha, False),
        ("phi", "phi2"), staggered=False, source=source,
    )


def memory_coefficient_table(descriptor: ClosureDescriptor) -> str:
    """Describe which memory-integral approximation a closure uses."""
    fam = descriptor.family
    if fam is Family.PN:
        return f"{descriptor.label}: memory integral dropped (first order optimal prediction)"
    if fam in (Family.SP3, Family.SSP3):
        return (
            f"{descriptor.label}: asymptotic parabolic system, "
            f"alpha = {descriptor.alpha}; diffusion weight f(t) = tau"
        )
    mode = descriptor.crescendo
    return f"{descriptor.label}: {_QUADRATURE_NAMES[mode]}, {_QUADRATURE_FORMULAS[mode]}"


def quadrature_name(mode: CrescendoMode) -> str:
    return _QUADRATURE_NAMES[CrescendoMode(mode)]
