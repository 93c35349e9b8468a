"""
Small dense complex matrices.

Every matrix-valued quantity of the library (reflection and transmission
matrices, propagation factors, the parity matrix) is a CMat of dimension n,
the number of polarizations (n = 2 for electromagnetism). Values are frozen
after construction so they can be shared freely between workers.

The n = 2 case takes closed-form paths; n > 3 falls back to numpy's pivoted
LU routines.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import CONDITION_BOUND, EXPONENT_CAP
from .errors import DimensionError, ExponentOverflowError, SingularMatrixError


@dataclass(frozen=True, eq=False)
class CMat:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionError(f"CMat needs a non-empty square array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, 'entries', arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    # operators keep the recursion formulas readable
    def __matmul__(self, other: 'CMat') -> 'CMat':
        return mat_mul(self, other)

    def __add__(self, other: 'CMat') -> 'CMat':
        _check_dims(self, other)
        return CMat(self.entries + other.entries)

    def __sub__(self, other: 'CMat') -> 'CMat':
        _check_dims(self, other)
        return CMat(self.entries - other.entries)

    def __neg__(self) -> 'CMat':
        return CMat(-self.entries)

    def __mul__(self, scalar: complex) -> 'CMat':
        return CMat(self.entries * scalar)

    __rmul__ = __mul__

    def __getitem__(self, index):
        return self.entries[index]

    def __repr__(self) -> str:
        return f"CMat({self.entries.tolist()!r})"

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def diagonal(self) -> np.ndarray:
        return self.entries.diagonal().copy()

    def off_diagonal_norm(self) -> float:
        off = self.entries - np.diag(self.entries.diagonal())
        return float(np.max(np.abs(off))) if self.dim > 1 else 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.entries)))

    def allclose(self, other: 'CMat', rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(
            np.allclose(self.entries, other.entries, rtol=rtol, atol=atol))


def _check_dims(a: CMat, b: CMat):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(n: int) -> CMat:
    return CMat(np.eye(n, dtype=complex))


def zeros(n: int) -> CMat:
    return CMat(np.zeros((n, n), dtype=complex))


def diag(values: Iterable[complex]) -> CMat:
    return CMat(np.diag(np.asarray(list(values), dtype=complex)))


def from_rows(rows: Sequence[Sequence[complex]]) -> CMat:
    return CMat(np.asarray(rows, dtype=complex))


def mat_mul(a: CMat, b: CMat) -> CMat:
    _check_dims(a, b)
    return CMat(a.entries @ b.entries)


def condition_estimate(a: CMat) -> float:
    """1-norm condition number; inf for exactly singular input."""
    if a.dim == 2:
        det = mat_det(a)
        if det == 0:
            return float('inf')
        m = a.entries
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
        return float(np.linalg.norm(m, 1) * np.linalg.norm(inv, 1))
    with np.errstate(all='ignore'):
        return float(np.linalg.cond(a.entries, 1)) if np.all(np.isfinite(a.entries)) else float('inf')


def mat_inv(a: CMat, bound: float = CONDITION_BOUND) -> CMat:
    """Inverse of a, refusing matrices whose condition estimate exceeds `bound`."""
    cond = condition_estimate(a)
    if not np.isfinite(cond) or cond > bound:
        raise SingularMatrixError(f"refusing to invert {a.dim}x{a.dim} matrix", cond)
    if a.dim == 1:
        return CMat(1.0 / a.entries)
    if a.dim == 2:
        m = a.entries
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        out = CMat(np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det)
    else:
        out = CMat(np.linalg.inv(a.entries))
    if not out.is_finite():
        raise SingularMatrixError("inverse has non-finite entries", cond)
    return out


def mat_det(a: CMat) -> complex:
    m = a.entries
    if a.dim == 1:
        return complex(m[0, 0])
    if a.dim == 2:
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    if a.dim == 3:
        return complex(
            m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
    return complex(np.linalg.det(m))


def diag_exp(values: Iterable[complex], cap: float = EXPONENT_CAP) -> CMat:
    """diag(e^{v_1}, ..., e^{v_n}); raises when any Re(v) exceeds the exponent cap."""
    vals = np.asarray(list(values), dtype=complex)
    if np.any(vals.real > cap):
        raise ExponentOverflowError(
            f"exponent {float(np.max(vals.real)):.1f} exceeds cap {cap:.1f}")
    return CMat(np.diag(np.exp(vals)))


def conjugate(v: CMat, a: CMat, v_inv: CMat) -> CMat:
    """v · a · v_inv (change of basis with a precomputed inverse)."""
    return CMat(v.entries @ a.entries @ v_inv.entries)
