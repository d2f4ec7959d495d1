"""Exact block algebra of the slab-geometry moment hierarchy.

The infinite moment system couples moment ``k`` to ``k-1`` and ``k+1`` through
the tridiagonal advection matrix ``B`` and damps it through the diagonal decay
matrix ``C = diag(kappa, kappa+sigma, kappa+sigma, ...)``.  Every closure in
this package is built from finite truncations of these matrices, permuted and
split into resolved (hat) and unresolved (tilde) blocks.

All matrices here are numpy object arrays of :class:`fractions.Fraction`, so
identities such as the vanishing triple product hold exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

STANDARD = "standard"
EVEN_ODD = "even_odd"
ORDERINGS = (STANDARD, EVEN_ODD)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def zeros(rows: int, cols: int | None = None) -> np.ndarray:
    """Object array of exact zeros."""
    cols = rows if cols is None else cols
    out = np.empty((rows, cols), dtype=object)
    out[...] = Fraction(0)
    return out


def as_rational(value) -> Fraction:
    """Convert ints, Fractions, decimal strings or floats to a Fraction.

    Floats are converted through their shortest repr, so ``1.5`` becomes
    ``3/2`` and ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(float(value)))
    return Fraction(str(value).strip())


def to_float(matrix: np.ndarray) -> np.ndarray:
    return np.array(matrix, dtype=float)


def advection_coefficient(k: int, l: int) -> Fraction:
    """Entry ``b_kl`` of the advection matrix.

    >>> advection_coefficient(0, 1), advection_coefficient(1, 0)
    (Fraction(1, 1), Fraction(1, 3))
    """
    if k < 0 or l < 0:
        raise ValueError("moment indices must be non-negative")
    if l == k + 1:
        return Fraction(k + 1, 2 * k + 1)
    if l == k - 1:
        return Fraction(k, 2 * k + 1)
    return Fraction(0)


def theta(N: int) -> Fraction:
    """Diffusion-correction coefficient (N+1)^2 / ((2N+1)(2N+3))."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return Fraction((N + 1) ** 2, (2 * N + 1) * (2 * N + 3))


@dataclass(frozen=True)
class AdvectionCoefficients:
    """Leading ``order x order`` block of the advection matrix."""

    order: int
    entries: np.ndarray = field(repr=False)

    @classmethod
    def truncated(cls, n: int) -> "AdvectionCoefficients":
        if n < 1:
            raise ValueError("need at least one moment")
        b = zeros(n)
        for k in range(n):
            for l in (k - 1, k + 1):
                if 0 <= l < n:
                    b[k, l] = advection_coefficient(k, l)
        return cls(n, _frozen(b))

    def as_float(self) -> np.ndarray:
        return to_float(self.entries)


@dataclass(frozen=True)
class DecayParameters:
    """Absorption ``kappa`` and scattering ``sigma`` rates, stored exactly."""

    kappa: Fraction
    sigma: Fraction

    def __init__(self, kappa, sigma):
        kappa, sigma = as_rational(kappa), as_rational(sigma)
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        if sigma < 0:
            raise ValueError("sigma must be >= 0")
        if kappa + sigma <= 0:
            raise ValueError("kappa + sigma must be > 0")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "sigma", sigma)

    @property
    def total(self) -> Fraction:
        return self.kappa + self.sigma

    @property
    def tau(self) -> Fraction:
        return 1 / self.total

    def diagonal(self, n: int) -> tuple[Fraction, ...]:
        return (self.kappa,) + (self.total,) * (n - 1)

    def matrix(self, n: int) -> np.ndarray:
        c = zeros(n)
        for i, v in enumerate(self.diagonal(n)):
            c[i, i] = v
        return _frozen(c)


def build_truncated_operators(
    n: int, decay: DecayParameters
) -> tuple[AdvectionCoefficients, tuple[Fraction, ...]]:
    """Truncated advection block ``B_n`` and decay diagonal for ``n`` moments."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return AdvectionCoefficients.truncated(n), decay.diagonal(n)


@dataclass(frozen=True)
class Ordering:
    kind: str
    resolved_count: int
    permutation: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.kind!r}")
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("permutation is not a bijection")
        if self.permutation and self.permutation[0] != 0:
            raise ValueError("ordering must keep u_0 first")

    @property
    def size(self) -> int:
        return len(self.permutation)

    def matrix(self) -> np.ndarray:
        """Permutation matrix P with ``(P u)[i] = u[permutation[i]]``."""
        p = zeros(self.size)
        for i, j in enumerate(self.permutation):
            p[i, j] = Fraction(1)
        return _frozen(p)

    def conjugate(self, matrix: np.ndarray) -> np.ndarray:
        """``P M P^T`` by index gathering."""
        idx = np.array(self.permutation)
        return matrix[np.ix_(idx, idx)]


def standard_ordering(N: int, M: int) -> Ordering:
    if M < N + 1:
        raise ValueError("truncation smaller than resolved set")
    return Ordering(STANDARD, N + 1, tuple(range(M)))


def even_odd_permutation(N: int, M: int) -> Ordering:
    """Even moments ``0..2N`` first, then odd ``1..2N+1``, then the rest."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if M < 2 * N + 2:
        raise ValueError(f"truncation size {M} < 2N+2 = {2 * N + 2}")
    perm = (
        list(range(0, 2 * N + 1, 2))
        + list(range(1, 2 * N + 2, 2))
        + list(range(2 * N + 2, M))
    )
    return Ordering(EVEN_ODD, N + 1, tuple(perm))


def make_ordering(kind: str, N: int, M: int) -> Ordering:
    if kind == STANDARD:
        return standard_ordering(N, M)
    if kind == EVEN_ODD:
        return even_odd_permutation(N, M)
    raise ValueError(f"unknown ordering {kind!r}")


@dataclass(frozen=True)
class BlockSplit:
    hat_hat: np.ndarray = field(repr=False)
    hat_tilde: np.ndarray = field(repr=False)
    tilde_hat: np.ndarray = field(repr=False)
    tilde_tilde: np.ndarray = field(repr=False)

    def reassemble(self) -> np.ndarray:
        top = np.hstack([self.hat_hat, self.hat_tilde])
        bottom = np.hstack([self.tilde_hat, self.tilde_tilde])
        return np.vstack([top, bottom])


def block_split(matrix: np.ndarray, resolved_count: int, padding: int) -> BlockSplit:
    """Split a (resolved+padding)-square matrix into hat/tilde blocks.

    ``padding`` must be at least ``resolved_count + 2``: each tridiagonal
    factor reaches one index further, and the triple product needs two.
    """
    if padding < resolved_count + 2:
        raise ValueError(
            f"padding {padding} < resolved_count + 2 = {resolved_count + 2}"
        )
    size = resolved_count + padding
    if matrix.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got {matrix.shape}")
    r = resolved_count
    return BlockSplit(
        _frozen(matrix[:r, :r].copy()),
        _frozen(matrix[:r, r:].copy()),
        _frozen(matrix[r:, :r].copy()),
        _frozen(matrix[r:, r:].copy()),
    )


def default_padding(resolved_count: int) -> int:
    return resolved_count + 2


def permuted_split(N: int, kind: str) -> BlockSplit:
    """Blocks of ``P B P^T`` for ``N+1`` resolved moments in the given ordering."""
    if N < 0:
        raise ValueError("N must be >= 0")
    r = N + 1
    pad = default_padding(r)
    M = r + pad
    ordering = make_ordering(kind, N, M)
    b = AdvectionCoefficients.truncated(M).entries
    return block_split(ordering.conjugate(b), r, pad)


@dataclass(frozen=True)
class DiffusionMatrix:
    order: int
    entries: np.ndarray = field(repr=False)
    kind: str

    def as_float(self) -> np.ndarray:
        return to_float(self.entries)


def diffusion_matrix(N: int, kind: str = STANDARD) -> DiffusionMatrix:
    """Double product ``B^ B~^`` of the hat-tilde and tilde-hat blocks."""
    s = permuted_split(N, kind)
    return DiffusionMatrix(N + 1, _frozen(s.hat_tilde @ s.tilde_hat), kind)


def triple_product(N: int, kind: str = STANDARD) -> np.ndarray:
    """``B^~ B~~ B~^``; exactly zero for both orderings."""
    s = permuted_split(N, kind)
    return _frozen(s.hat_tilde @ s.tilde_tilde @ s.tilde_hat)


def is_zero(matrix: np.ndarray) -> bool:
    return all(v == 0 for v in np.asarray(matrix).flat)


def determinant(matrix: np.ndarray) -> Fraction:
    """Exact determinant by fraction-preserving Gaussian elimination."""
    a = [[as_rational(v) for v in row] for row in np.asarray(matrix)]
    n = len(a)
    det = Fraction(1)
    for i in range(n):
        pivot = next((j for j in range(i, n) if a[j][i] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != i:
            a[i], a[pivot] = a[pivot], a[i]
            det = -det
        det *= a[i][i]
        for j in range(i + 1, n):
            f = a[j][i] / a[i][i]
            if f:
                a[j] = [x - f * y for x, y in zip(a[j], a[i])]
    return det


def format_matrix(matrix: np.ndarray, exact: bool = True) -> str:
    """Render a matrix as aligned rows of rationals or 4-decimal floats."""
    m = np.asarray(matrix)
    if exact:
        cells = [[str(as_rational(v)) for v in row] for row in m]
    else:
        cells = [[f"{float(v):.4f}" for v in row] for row in m]
    width = max((len(c) for row in cells for c in row), default=1)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def spectral_report(matrix: Sequence) -> dict:
    """Definiteness diagnostics for a (possibly non-symmetric) real matrix."""
    a = np.array(matrix, dtype=float)
    eig = np.linalg.eigvals(a)
    sym = np.linalg.eigvalsh(0.5 * (a + a.T))
    return {
        "min_eig_real": float(eig.real.min()),
        "max_eig_imag": float(np.abs(eig.imag).max()),
        "min_symmetric_part_eig": float(sym.min()),
        "spectrally_positive": bool(eig.real.min() > 0),
        "symmetric_part_positive": bool(sym.min() > 0),
    }
