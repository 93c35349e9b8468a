"""
Identity residuals of the scattering data of a stack at random spectral points.

Each check compares two routes to the same quantity and reports the largest
relative disagreement seen over the sampled (xi, kpar) points:

    contractibility     a zero-width layer squeezed into an interface vanishes
    swap                f(i|k|j) f(i|l|k) = f(i|l|j) f(l|k|j)
    split_independence  tilde_f does not depend on the split region
    insertion           segment_coeffs(0|N+1) does not depend on the join point
    boundary_induction  boundary_reflection agrees with the ladder recursion
    transfer_product    chained transfer matrices reproduce the stack coefficients
    uv_factorization    opposite continuation of tilde_f (reciprocal, conductor-bounded)

Usage:
    residuals = identity_residuals(stack, samples=200, seed=7)
    assert_identities(residuals)
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .cxmat import CMat, identity, zeros
from .errors import IdentityViolation
from .logging_utils import log_info, log_warn
from .materials import Basis, CoeffPair, PerfectConductor
from .spectral import relative_gap, tilde_char_fn, verify_swap_identity, verify_uv_factorization
from .stack import (
    LayerStack, Region, Segment, boundary_reflection, left_reflections, right_reflections,
    segment_coeffs, transfer_matrix,
)

THRESHOLDS: Dict[str, float] = {
    'contractibility': 1e-12,
    'swap': 1e-10,
    'split_independence': 1e-10,
    'insertion': 1e-10,
    'boundary_induction': 1e-10,
    'transfer_product': 1e-9,
    'uv_factorization': 1e-9,
}


@dataclass(frozen=True)
class IdentityResidual:
    identity: str
    max_residual: float
    threshold: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.threshold


def _matrix_gap(a: CMat, b: CMat) -> float:
    scale = max(1.0, float(np.max(np.abs(a.entries))), float(np.max(np.abs(b.entries))))
    return float(np.max(np.abs(a.entries - b.entries))) / scale


def _coeff_gap(a: CoeffPair, b: CoeffPair) -> float:
    return max(_matrix_gap(a.r, b.r), _matrix_gap(a.t, b.t),
               _matrix_gap(a.r_rev, b.r_rev), _matrix_gap(a.t_rev, b.t_rev))


def _squeeze_stacks(stack: LayerStack) -> List[LayerStack]:
    """A|B(0)|A for each adjacent non-conductor pair A, B."""
    out = []
    for a, b in zip(stack.materials[:-1], stack.materials[1:]):
        if isinstance(a, PerfectConductor) or isinstance(b, PerfectConductor) or a == b:
            continue
        for outer, inner in ((a, b), (b, a)):
            out.append(LayerStack((Region(outer, math.inf), Region(inner, 0.0),
                                   Region(outer, math.inf))))
    return out


def _contractibility(stack: LayerStack, basis: Basis) -> Callable[[float, float], float]:
    squeezed = _squeeze_stacks(stack)
    one, nil = identity(2), zeros(2)

    def check(xi: float, kpar: float) -> float:
        worst = 0.0
        for s in squeezed:
            c = segment_coeffs(s, Segment(0, 2), xi, kpar, basis)
            worst = max(worst, _coeff_gap(c, CoeffPair(nil, one, nil, one, basis)))
        return worst

    return check


def _swap(stack: LayerStack, basis: Basis, rng: np.random.Generator):
    def check(xi: float, kpar: float) -> float:
        indices = sorted(rng.choice(stack.N + 2, size=4, replace=False).tolist())
        return verify_swap_identity(stack, indices, xi, kpar, basis)
    return check


def _split_independence(stack: LayerStack, basis: Basis):
    def check(xi: float, kpar: float) -> float:
        ref = tilde_char_fn(stack, xi, kpar, basis, split=1).value
        return max((relative_gap(ref, tilde_char_fn(stack, xi, kpar, basis, split=j).value)
                    for j in range(2, stack.N + 1)), default=0.0)
    return check


def _insertion(stack: LayerStack, basis: Basis):
    whole = Segment(0, stack.N + 1)

    def check(xi: float, kpar: float) -> float:
        ref = segment_coeffs(stack, whole, xi, kpar, basis)
        return max((_coeff_gap(ref, segment_coeffs(stack, whole, xi, kpar, basis, split=s))
                    for s in range(1, stack.N + 1)), default=0.0)

    return check


def _boundary_induction(stack: LayerStack, basis: Basis):
    def check(xi: float, kpar: float) -> float:
        worst = 0.0
        for j in range(1, stack.N + 1):
            ladder_left = left_reflections(stack, j, xi, kpar, basis)[-1]
            ladder_right = right_reflections(stack, j, xi, kpar, basis)[0]
            worst = max(worst,
                        _matrix_gap(ladder_left, boundary_reflection(stack, j, 'left', xi, kpar, basis)),
                        _matrix_gap(ladder_right, boundary_reflection(stack, j, 'right', xi, kpar, basis)))
        return worst
    return check


def _transfer_product(stack: LayerStack, basis: Basis):
    def check(xi: float, kpar: float) -> float:
        total = transfer_matrix(stack, 0, xi, kpar, basis)
        for j in range(1, stack.N + 1):
            total = transfer_matrix(stack, j, xi, kpar, basis) @ total
        ref = segment_coeffs(stack, Segment(0, stack.N + 1), xi, kpar, basis)
        return _coeff_gap(ref, total.coeffs(basis))
    return check


def _uv(stack: LayerStack, basis: Basis):
    def check(xi: float, kpar: float) -> float:
        return verify_uv_factorization(stack, xi, kpar, basis)
    return check


def _checks(stack: LayerStack, basis: Basis, rng: np.random.Generator) -> Dict[str, Callable]:
    checks = {'contractibility': _contractibility(stack, basis)}
    if stack.N >= 2:
        checks['swap'] = _swap(stack, basis, rng)
    checks['split_independence'] = _split_independence(stack, basis)
    checks['insertion'] = _insertion(stack, basis)
    if stack.N >= 1:
        checks['boundary_induction'] = _boundary_induction(stack, basis)
    if not any(isinstance(m, PerfectConductor) for m in stack.materials):
        checks['transfer_product'] = _transfer_product(stack, basis)
    if stack.reciprocal and stack.conductor_bounded:
        checks['uv_factorization'] = _uv(stack, basis)
    return checks


def sample_points(stack: LayerStack, samples: int, rng: np.random.Generator) -> np.ndarray:
    """(xi, kpar) pairs with k_hat * (total interior width) of order one."""
    width = sum(stack.widths[1:-1]) or 1.0
    return rng.uniform(0.05, 1.0, size=(samples, 2)) / width


def identity_residuals(stack: LayerStack, samples: int = 100, seed: int = 0,
                       basis: Basis = Basis.TMTE) -> List[IdentityResidual]:
    rng = np.random.default_rng(seed)
    points = sample_points(stack, samples, rng)
    out = []
    for name, check in _checks(stack, basis, rng).items():
        worst = max((check(float(xi), float(kpar)) for xi, kpar in points), default=0.0)
        out.append(IdentityResidual(name, worst, THRESHOLDS[name], samples))
    log_info('identity_residuals', samples=samples, seed=seed, basis=basis.value,
             residuals={r.identity: r.max_residual for r in out})
    return out


def assert_identities(residuals: Sequence[IdentityResidual]):
    failed = [r for r in residuals if not r.passed]
    if failed:
        summary = ', '.join(f"{r.identity}={r.max_residual:.3e} (> {r.threshold:.0e})"
                            for r in failed)
        log_warn('identity_violation', failed=[r.identity for r in failed])
        raise IdentityViolation(summary)
