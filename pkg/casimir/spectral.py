"""
Characteristic functions of a stack at one imaginary-axis spectral point.

    f(l|k|j) = det[1 - El R(j|k) Er R(l|k)]

is the mode condition of gap k between the stacks (l|k) and (k|j). The
pole-free product tilde_f(0|N+1) multiplies f(0|j|N+1) by the adjacent-pair
ladder f(0|k|k+1) (k < j) and f(k-1|k|N+1) (k > j); its value does not depend
on the split j.
"""

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .config import EXPONENT_CAP
from .cxmat import CMat, identity, mat_det
from .errors import DomainError, ExponentOverflowError, StackError
from .materials import Basis, interface_coeffs, wavenumbers
from .stack import LayerStack, left_reflections, right_reflections, region_propagation

Triple = Tuple[int, int, int]


@dataclass(frozen=True)
class CharValue:
    value: complex
    triple: Triple
    xi: float
    kpar: float
    deviation: complex = 0j   # value - 1, assembled without cancellation


@dataclass(frozen=True)
class TildeCharValue:
    value: complex
    factorization: Tuple[Triple, ...]
    factors: Tuple[complex, ...]
    deviations: Tuple[complex, ...] = ()


def _gap_deviation(stack: LayerStack, k: int, refl_left: CMat, refl_right: CMat, xi: float,
                   kpar: float, basis: Basis, branch: int) -> complex:
    """det[1 - A] - 1 for the round trip A of gap k; -tr A + det A when A is 2x2."""
    right, left = region_propagation(stack, k, xi, kpar, basis, branch)
    trip = left @ refl_right @ right @ refl_left
    if trip.dim == 2:
        return mat_det(trip) - trip.trace()
    return mat_det(identity(trip.dim) - trip) - 1.0


def ordered_triple(stack: LayerStack, triple: Triple) -> Triple:
    l, k, j = triple
    lo, hi = min(l, j), max(l, j)
    if not lo < k < hi:
        raise StackError(f"region {k} is not between {l} and {j}")
    if lo < 0 or hi > stack.N + 1:
        raise StackError(f"triple {triple} outside regions 0..{stack.N + 1}")
    return lo, k, hi


def char_fn(stack: LayerStack, triple: Triple, xi: float, kpar: float,
            basis: Basis = Basis.TMTE, branch: int = 1) -> CharValue:
    lo, k, hi = ordered_triple(stack, triple)
    refl_left = left_reflections(stack, k, xi, kpar, basis, start=lo, branch=branch)[-1]
    refl_right = right_reflections(stack, k, xi, kpar, basis, end=hi, branch=branch)[0]
    dev = _gap_deviation(stack, k, refl_left, refl_right, xi, kpar, basis, branch)
    return CharValue(1.0 + dev, tuple(triple), xi, kpar, dev)


def ladder_triples(stack: LayerStack, split: int) -> List[Triple]:
    """Constituent triples of tilde_f for the given split, main factor first."""
    n = stack.N
    triples = [(0, split, n + 1)]
    triples += [(0, k, k + 1) for k in range(1, split)]
    triples += [(k - 1, k, n + 1) for k in range(split + 1, n + 1)]
    return triples


def tilde_char_fn(stack: LayerStack, xi: float, kpar: float, basis: Basis = Basis.TMTE,
                  split: Optional[int] = None, branch: int = 1) -> TildeCharValue:
    """
    Pole-free characteristic function, one prefix and one suffix sweep.

    branch = -1 evaluates the opposite continuation (growing factors).
    """
    split = 1 if split is None else split
    stack.check_interior(split)
    n = stack.N
    prefix = left_reflections(stack, split, xi, kpar, basis, branch=branch)     # R(0|k), k = 1..split
    suffix = right_reflections(stack, split, xi, kpar, basis, branch=branch)    # R(N+1|k), k = split..N
    devs = [_gap_deviation(stack, split, prefix[-1], suffix[0], xi, kpar, basis, branch)]
    for k in range(1, split):
        near = interface_coeffs(stack.regions[k].material, stack.regions[k + 1].material,
                                xi, kpar, basis).r
        devs.append(_gap_deviation(stack, k, prefix[k - 1], near, xi, kpar, basis, branch))
    for k in range(split + 1, n + 1):
        near = interface_coeffs(stack.regions[k - 1].material, stack.regions[k].material,
                                xi, kpar, basis).r_rev
        devs.append(_gap_deviation(stack, k, near, suffix[k - split], xi, kpar, basis, branch))
    factors = tuple(1.0 + d for d in devs)
    value = complex(math.prod(factors))
    return TildeCharValue(value, tuple(ladder_triples(stack, split)), factors, tuple(devs))


def relative_gap(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def verify_swap_identity(stack: LayerStack, indices: Sequence[int], xi: float, kpar: float,
                         basis: Basis = Basis.TMTE) -> float:
    """|f(i|k|j) f(i|l|k) - f(i|l|j) f(l|k|j)| / |lhs| for i < l < k < j."""
    i, l, k, j = indices
    if not i < l < k < j:
        raise StackError(f"indices must be strictly increasing, got {tuple(indices)}")
    lhs = (char_fn(stack, (i, k, j), xi, kpar, basis).value
           * char_fn(stack, (i, l, k), xi, kpar, basis).value)
    rhs = (char_fn(stack, (i, l, j), xi, kpar, basis).value
           * char_fn(stack, (l, k, j), xi, kpar, basis).value)
    if lhs == 0:
        return abs(rhs)
    return abs(lhs - rhs) / abs(lhs)


def _log_value(t: TildeCharValue, xi: float, kpar: float) -> complex:
    """Principal log of tilde_f summed factor by factor."""
    total = 0j
    for f in t.factors:
        if f == 0 or not cmath.isfinite(f):
            raise DomainError(f"characteristic factor {f} has no finite log at xi={xi}, kpar={kpar}")
        total += cmath.log(f)
    return total


def verify_uv_factorization(stack: LayerStack, xi: float, kpar: float,
                            basis: Basis = Basis.TMTE, split: Optional[int] = None) -> float:
    """
    Relative residual of tilde_f(growing) = tilde_f(decaying) * det prod e^{2 k_hat dz}.

    Compared in log space. Needs reciprocal media between perfect conductors;
    raises DomainError when the growing continuation overflows.
    """
    if not stack.reciprocal:
        raise StackError("opposite-continuation check supports reciprocal media only")
    if not stack.conductor_bounded:
        raise StackError("opposite-continuation check needs perfect-conductor boundaries")
    decaying = tilde_char_fn(stack, xi, kpar, basis, split)
    try:
        growing = tilde_char_fn(stack, xi, kpar, basis, split, branch=-1)
    except ExponentOverflowError as exc:
        raise DomainError(f"growing continuation overflows at xi={xi}, kpar={kpar}: {exc}") from exc
    exponent = 0.0
    for region in stack.regions[1:-1]:
        if region.width > 0.0:
            wn = wavenumbers(region.material, xi, kpar)
            exponent += 2.0 * region.width * sum(v.real for v in wn.values)
    log_gap = _log_value(growing, xi, kpar) - _log_value(decaying, xi, kpar) - exponent
    if log_gap.real > EXPONENT_CAP:
        return math.inf
    return abs(cmath.exp(log_gap) - 1.0)
