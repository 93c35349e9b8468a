"""
Layer stacks and the effective reflection/transmission recursion.

Regions are numbered 0..N+1 from left to right; 0 and N+1 are semi-infinite.
For a segment (i|j) with i < j the amplitudes in region i are referenced at
z_{i|i+1} and those in region j at z_{j-1|j}.

Composite coefficients are folded with decaying propagation factors only:

    R(i|j)  = rA + tA' El rB Er (1 - rA' El rB Er)^-1 tA
    T(i|j)  = tB Er (1 - rA' El rB Er)^-1 tA
    R'(i|j) = rB' + tB Er rA' El (1 - rB Er rA' El)^-1 tB'
    T'(i|j) = tA' El (1 - rB Er rA' El)^-1 tB'

for A = (i|k), B = (k|j) and Er/El the right/left-mover propagation across k.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

from .config import FAR_BOUNDARY_FACTOR, FAR_BOUNDARY_SCALE
from .cxmat import CMat, identity, mat_inv
from .errors import RecursionSingularError, SingularMatrixError, StackError
from .materials import (
    Basis, CoeffPair, Material, PerfectConductor, check_pairing, convert_left_to_right,
    convert_right_to_left, interface_coeffs, is_reciprocal, propagation,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class Region:
    material: Material
    width: float


@dataclass(frozen=True)
class LayerStack:
    regions: Tuple[Region, ...]

    def __post_init__(self):
        regions = tuple(self.regions)
        object.__setattr__(self, 'regions', regions)
        if len(regions) < 2:
            raise StackError(f"a stack needs at least 2 regions, got {len(regions)}")
        last = len(regions) - 1
        for idx, region in enumerate(regions):
            if idx in (0, last):
                if not math.isinf(region.width):
                    raise StackError(f"boundary region {idx} must be semi-infinite")
                continue
            if not (math.isfinite(region.width) and region.width >= 0.0):
                raise StackError(f"region {idx} width must be finite and >= 0, got {region.width}")
            if isinstance(region.material, PerfectConductor):
                raise StackError(f"perfect conductor allowed only as a boundary, found in region {idx}")
        for idx in range(last):
            check_pairing(regions[idx].material, regions[idx + 1].material)

    @classmethod
    def from_layers(cls, layers: Iterable[Tuple[Material, float]]) -> 'LayerStack':
        return cls(tuple(Region(m, float(w)) for m, w in layers))

    @property
    def N(self) -> int:
        return len(self.regions) - 2

    @property
    def materials(self) -> Tuple[Material, ...]:
        return tuple(r.material for r in self.regions)

    @property
    def widths(self) -> Tuple[float, ...]:
        return tuple(r.width for r in self.regions)

    @property
    def interface_positions(self) -> Tuple[float, ...]:
        """z_{j|j+1} for j = 0..N, with z_{0|1} = 0."""
        positions = [0.0]
        for region in self.regions[1:-1]:
            positions.append(positions[-1] + region.width)
        return tuple(positions)

    @property
    def conductor_bounded(self) -> bool:
        return (isinstance(self.regions[0].material, PerfectConductor)
                and isinstance(self.regions[-1].material, PerfectConductor))

    @property
    def reciprocal(self) -> bool:
        return all(is_reciprocal(m) for m in self.materials)

    def smallest_width(self) -> float:
        positive = [r.width for r in self.regions[1:-1] if r.width > 0.0]
        if not positive:
            raise StackError("stack has no interior region of positive width")
        return min(positive)

    def check_interior(self, j: int):
        if not 1 <= j <= self.N:
            raise StackError(f"region {j} is not interior (N = {self.N})")

    def with_width(self, j: int, width: float) -> 'LayerStack':
        self.check_interior(j)
        regions = list(self.regions)
        regions[j] = replace(regions[j], width=float(width))
        return LayerStack(tuple(regions))

    def insert_layer(self, position: int, material: Material, width: float) -> 'LayerStack':
        """New region at index `position`; later regions shift right by one."""
        if not 1 <= position <= self.N + 1:
            raise StackError(f"cannot insert a layer at position {position}")
        regions = list(self.regions)
        regions.insert(position, Region(material, float(width)))
        return LayerStack(tuple(regions))

    def pad_far_boundaries(self, k_min: Optional[float] = None) -> 'LayerStack':
        """
        Widen regions 1 and N so the boundaries decouple from the inner layers.

        Both are raised to at least FAR_BOUNDARY_FACTOR / k_min, where by default
        k_min = 1 / (FAR_BOUNDARY_SCALE * L) and L is the width of regions 2..N-1.
        """
        if self.N < 3:
            raise StackError("far-boundary padding needs at least three interior regions")
        if k_min is None:
            inner = sum(r.width for r in self.regions[2:-2])
            if inner <= 0.0:
                raise StackError("far-boundary padding needs inner layers of positive width")
            k_min = 1.0 / (FAR_BOUNDARY_SCALE * inner)
        target = FAR_BOUNDARY_FACTOR / k_min
        padded = self
        for j in (1, self.N):
            if padded.regions[j].width < target:
                padded = padded.with_width(j, target)
        return padded


@dataclass(frozen=True)
class Segment:
    i: int
    j: int

    def check(self, stack: LayerStack):
        if self.i == self.j:
            raise StackError(f"segment ({self.i}|{self.j}) is empty")
        if min(self.i, self.j) < 0 or max(self.i, self.j) > stack.N + 1:
            raise StackError(f"segment ({self.i}|{self.j}) outside regions 0..{stack.N + 1}")


@dataclass(frozen=True)
class TransferMatrix:
    """Block matrix [[a, b], [c, d]] acting on (right-mover, left-mover) amplitudes."""
    a: CMat
    b: CMat
    c: CMat
    d: CMat

    def __matmul__(self, other: 'TransferMatrix') -> 'TransferMatrix':
        return TransferMatrix(
            a=self.a @ other.a + self.b @ other.c,
            b=self.a @ other.b + self.b @ other.d,
            c=self.c @ other.a + self.d @ other.c,
            d=self.c @ other.b + self.d @ other.d,
        )

    def coeffs(self, basis: Basis) -> CoeffPair:
        """Reflection and transmission read off the blocks (no wave entering from the far side)."""
        d_inv = mat_inv(self.d)
        return CoeffPair(
            r=-(d_inv @ self.c),
            t=self.a - self.b @ d_inv @ self.c,
            r_rev=self.b @ d_inv,
            t_rev=d_inv,
            basis=basis,
        )


# ============================================================================
# Recursion
# ============================================================================

def _interface(stack: LayerStack, k: int, xi: float, kpar: float, basis: Basis) -> CoeffPair:
    return interface_coeffs(stack.regions[k].material, stack.regions[k + 1].material,
                            xi, kpar, basis)


def region_propagation(stack: LayerStack, k: int, xi: float, kpar: float, basis: Basis,
                       branch: int) -> Tuple[CMat, CMat]:
    region = stack.regions[k]
    return propagation(region.material, xi, kpar, region.width, basis, branch)


def _join(a: CoeffPair, b: CoeffPair, right: CMat, left: CMat, index: int) -> CoeffPair:
    one = identity(a.r.dim)
    try:
        forward = mat_inv(one - a.r_rev @ left @ b.r @ right) @ a.t
        backward = mat_inv(one - b.r @ right @ a.r_rev @ left) @ b.t_rev
    except SingularMatrixError as exc:
        logger.debug("resonant denominator across region %d: %s", index, exc)
        raise RecursionSingularError("resonant denominator", index, exc.condition) from exc
    return CoeffPair(
        r=a.r + a.t_rev @ left @ b.r @ right @ forward,
        t=b.t @ right @ forward,
        r_rev=b.r_rev + b.t @ right @ a.r_rev @ left @ backward,
        t_rev=a.t_rev @ left @ backward,
        basis=a.basis,
    )


def _fold(stack: LayerStack, lo: int, hi: int, xi: float, kpar: float, basis: Basis,
          branch: int) -> CoeffPair:
    acc = _interface(stack, lo, xi, kpar, basis)
    for k in range(lo + 1, hi):
        right, left = region_propagation(stack, k, xi, kpar, basis, branch)
        acc = _join(acc, _interface(stack, k, xi, kpar, basis), right, left, k)
    return acc


def segment_coeffs(stack: LayerStack, seg: Segment, xi: float, kpar: float, basis: Basis,
                   split: Optional[int] = None, branch: int = 1) -> CoeffPair:
    """
    Effective coefficients of the stack (i|j), region i taking the role of `left`.

    `split` joins (i|split) and (split|j) instead of folding left to right;
    every split gives the same result.
    """
    seg.check(stack)
    lo, hi = sorted((seg.i, seg.j))
    if hi - lo == 1 or split is None:
        out = _fold(stack, lo, hi, xi, kpar, basis, branch)
    else:
        if not lo < split < hi:
            raise StackError(f"split {split} not inside segment ({lo}|{hi})")
        right, left = region_propagation(stack, split, xi, kpar, basis, branch)
        out = _join(_fold(stack, lo, split, xi, kpar, basis, branch),
                    _fold(stack, split, hi, xi, kpar, basis, branch), right, left, split)
    return out if seg.i < seg.j else out.reversed()


def left_reflections(stack: LayerStack, upto: int, xi: float, kpar: float, basis: Basis,
                     start: int = 0, branch: int = 1) -> List[CMat]:
    """[R(start|k) for k = start+1..upto], each seen from region k looking left."""
    out = [_interface(stack, start, xi, kpar, basis).r_rev]
    one = identity(2)
    for k in range(start + 1, upto):
        c = _interface(stack, k, xi, kpar, basis)
        right, left = region_propagation(stack, k, xi, kpar, basis, branch)
        bounce = right @ out[-1] @ left
        try:
            inner = mat_inv(one - c.r @ bounce)
        except SingularMatrixError as exc:
            raise RecursionSingularError("resonant denominator", k, exc.condition) from exc
        out.append(c.r_rev + c.t @ bounce @ inner @ c.t_rev)
    return out


def right_reflections(stack: LayerStack, downto: int, xi: float, kpar: float, basis: Basis,
                      end: Optional[int] = None, branch: int = 1) -> List[CMat]:
    """[R(end|k) for k = downto..end-1], each seen from region k looking right."""
    end = stack.N + 1 if end is None else end
    out = [_interface(stack, end - 1, xi, kpar, basis).r]
    one = identity(2)
    for k in range(end - 2, downto - 1, -1):
        c = _interface(stack, k, xi, kpar, basis)
        right, left = region_propagation(stack, k + 1, xi, kpar, basis, branch)
        bounce = left @ out[-1] @ right
        try:
            inner = mat_inv(one - c.r_rev @ bounce)
        except SingularMatrixError as exc:
            raise RecursionSingularError("resonant denominator", k + 1, exc.condition) from exc
        out.append(c.r + c.t_rev @ bounce @ inner @ c.t)
    out.reverse()
    return out


def boundary_reflection(stack: LayerStack, j: int, side: str, xi: float, kpar: float,
                        basis: Basis) -> CMat:
    """
    R(0|j) (side='left') or R(N+1|j) (side='right') by induction over interfaces.

    Each step uses the contractibility relations to write the new reflection as
    T (1 - Q r)^-1 (Q - r) T^-1 with Q the old reflection dressed by decaying
    factors. Evaluated in the helicity basis when the stack holds a Weyl layer.
    """
    stack.check_interior(j)
    work_basis = basis if stack.reciprocal else Basis.HELICITY
    one = identity(2)
    if side == 'left':
        refl = _interface(stack, 0, xi, kpar, work_basis).r_rev
        steps = [(m - 1, m) for m in range(2, j + 1)]
    elif side == 'right':
        refl = _interface(stack, stack.N, xi, kpar, work_basis).r
        steps = [(m + 1, m) for m in range(stack.N - 1, j - 1, -1)]
    else:
        raise StackError(f"side must be 'left' or 'right', got {side!r}")
    for via, m in steps:
        right, left = region_propagation(stack, via, xi, kpar, work_basis, 1)
        if side == 'left':
            c = _interface(stack, m - 1, xi, kpar, work_basis)
            bounce, mirror, trans = right @ refl @ left, c.r, c.t
        else:
            c = _interface(stack, m, xi, kpar, work_basis)
            bounce, mirror, trans = left @ refl @ right, c.r_rev, c.t_rev
        try:
            refl = trans @ mat_inv(one - bounce @ mirror) @ (bounce - mirror) @ mat_inv(trans)
        except SingularMatrixError as exc:
            raise RecursionSingularError("singular induction step", via, exc.condition) from exc
    if side == 'left':
        return convert_left_to_right(refl, work_basis, basis)
    return convert_right_to_left(refl, work_basis, basis)


def transfer_matrix(stack: LayerStack, j: int, xi: float, kpar: float,
                    basis: Basis) -> TransferMatrix:
    """
    M_{j+1|j}: amplitudes at the left edge of region j (at z_{0|1} for j = 0)
    to amplitudes at the left edge of region j+1.
    """
    if not 0 <= j <= stack.N:
        raise StackError(f"no interface {j}|{j + 1} in a stack with N = {stack.N}")
    c = _interface(stack, j, xi, kpar, basis)
    t_rev_inv = mat_inv(c.t_rev)
    m = TransferMatrix(
        a=c.t - c.r_rev @ t_rev_inv @ c.r,
        b=c.r_rev @ t_rev_inv,
        c=-(t_rev_inv @ c.r),
        d=t_rev_inv,
    )
    if j == 0:
        return m
    decay, _ = region_propagation(stack, j, xi, kpar, basis, 1)
    _, grow = region_propagation(stack, j, xi, kpar, basis, -1)
    return TransferMatrix(a=m.a @ decay, b=m.b @ grow, c=m.c @ decay, d=m.d @ grow)


def inverse_transfer_matrix(stack: LayerStack, j: int, xi: float, kpar: float,
                            basis: Basis) -> TransferMatrix:
    """M_{j|j+1}, assembled from the left-incidence coefficients."""
    if not 0 <= j <= stack.N:
        raise StackError(f"no interface {j}|{j + 1} in a stack with N = {stack.N}")
    c = _interface(stack, j, xi, kpar, basis)
    t_inv = mat_inv(c.t)
    m = TransferMatrix(
        a=t_inv,
        b=-(t_inv @ c.r_rev),
        c=c.r @ t_inv,
        d=c.t_rev - c.r @ t_inv @ c.r_rev,
    )
    if j == 0:
        return m
    _, decay = region_propagation(stack, j, xi, kpar, basis, 1)
    grow, _ = region_propagation(stack, j, xi, kpar, basis, -1)
    return TransferMatrix(a=grow @ m.a, b=grow @ m.b, c=decay @ m.c, d=decay @ m.d)
