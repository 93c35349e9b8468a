"""
Casimir force per unit area on the walls of an interior gap j:

    F = -T sum'_l int k dk / (2 pi)
        tr[(kL X + X kR) R(0|j) (1 - X R(0|j))^-1],   X = El R(N+1|j) Er

with kR/kL and Er/El the wavenumbers and decaying propagation factors of
region j for right- and left-movers. F = -dF_cas/d(width of j) at fixed other
widths; a negative value means the walls attract.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Tuple

from .config import DIAGONAL_TOLERANCE
from .cxmat import CMat, identity, mat_inv
from .errors import NotDiagonalError, RecursionSingularError, SingularMatrixError, StackError
from .logging_utils import log_info
from .materials import Basis, max_off_diagonal, wavenumber_matrices
from .stack import LayerStack, left_reflections, region_propagation, right_reflections
from .thermo import (
    ObservableResult, QuadratureSpec, ThermalSpec, Tally, matsubara_sum, prepare_stack,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class ForceQuery:
    stack: LayerStack
    gap: int
    thermal: ThermalSpec = field(default_factory=ThermalSpec)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    basis: Basis = Basis.TMTE
    far_boundary: bool = False

    def __post_init__(self):
        self.stack.check_interior(self.gap)


def _gap_data(stack: LayerStack, j: int, xi: float, kpar: float,
              basis: Basis) -> Tuple[CMat, CMat, CMat, CMat, CMat, CMat]:
    r0 = left_reflections(stack, j, xi, kpar, basis)[-1]
    rn = right_reflections(stack, j, xi, kpar, basis)[0]
    er, el = region_propagation(stack, j, xi, kpar, basis, 1)
    k_right, k_left = wavenumber_matrices(stack.regions[j].material, xi, kpar, basis)
    return r0, rn, er, el, k_right, k_left


def _general_kernel(stack: LayerStack, j: int, basis: Basis) -> Callable[..., complex]:
    one = identity(2)

    def kernel(xi: float, kpar: float) -> complex:
        r0, rn, er, el, k_right, k_left = _gap_data(stack, j, xi, kpar, basis)
        bounce = el @ rn @ er
        try:
            inner = mat_inv(one - bounce @ r0)
        except SingularMatrixError as exc:
            logger.debug("gap %d denominator singular at xi=%g kpar=%g", j, xi, kpar)
            raise RecursionSingularError("singular gap denominator", j, exc.condition) from exc
        return -((k_left @ bounce + bounce @ k_right) @ r0 @ inner).trace()

    return kernel


def _diagonal_kernel(stack: LayerStack, j: int, basis: Basis) -> Callable[..., complex]:
    def kernel(xi: float, kpar: float) -> complex:
        data = _gap_data(stack, j, xi, kpar, basis)
        off = max_off_diagonal(*data)
        if off > DIAGONAL_TOLERANCE:
            raise NotDiagonalError(
                f"off-diagonal magnitude {off:.3e} in the {basis.value} basis at "
                f"xi={xi}, kpar={kpar}; use force_general")
        r0, rn, er, el, k_right, k_left = (m.diagonal() for m in data)
        total = 0j
        for lam in range(len(r0)):
            bounce = el[lam] * rn[lam] * er[lam]
            total -= (k_left[lam] + k_right[lam]) * bounce * r0[lam] / (1.0 - bounce * r0[lam])
        return total

    return kernel


def _real(kernel: Callable[..., complex]):
    def observed(xi: float, kpar: float, tally: Tally) -> float:
        z = complex(kernel(xi, kpar))
        tally.observe(z)
        return z.real
    return observed


def _run(name: str, q: ForceQuery, factory) -> ObservableResult:
    stack = prepare_stack(q.stack, q.far_boundary)
    scale = q.quad.scale or stack.regions[q.gap].width
    result = matsubara_sum(_real(factory(stack, q.gap, q.basis)), q.thermal, q.quad, scale)
    log_info(name, gap=q.gap, value=result.value, error_estimate=result.error_estimate,
             evaluations=result.evaluations, terms=result.terms,
             temperature=q.thermal.temperature, basis=q.basis.value)
    return result


def force_general(q: ForceQuery) -> ObservableResult:
    """Matrix trace formula; valid for every supported stack and basis."""
    return _run('force_general', q, _general_kernel)


def force_diagonal(q: ForceQuery) -> ObservableResult:
    """
    Per-polarization Lifshitz sum. Every matrix must be diagonal in q.basis
    (TMTE for dielectric/conductor stacks, HELICITY for Weyl|vacuum stacks);
    raises NotDiagonalError otherwise.
    """
    return _run('force_diagonal', q, _diagonal_kernel)


def force_on_body(stack: LayerStack, body: Tuple[int, int], thermal: ThermalSpec = ThermalSpec(),
                  quad_spec: QuadratureSpec = QuadratureSpec(), basis: Basis = Basis.TMTE,
                  far_boundary: bool = False) -> ObservableResult:
    """
    F(0|j|N+1) - F(0|k|N+1) for the rigid body between gaps k and j = body.

    This is the generalized force on width j when width k + width j is held
    fixed: a positive value moves the body so that gap j widens.
    """
    k, j = body
    stack = prepare_stack(stack, far_boundary)
    stack.check_interior(k)
    stack.check_interior(j)
    if k == j:
        raise StackError(f"body gaps must differ, got ({k}, {j})")
    kernel_j = _general_kernel(stack, j, basis)
    kernel_k = _general_kernel(stack, k, basis)

    def kernel(xi: float, kpar: float) -> complex:
        return kernel_j(xi, kpar) - kernel_k(xi, kpar)

    scale = quad_spec.scale or min(stack.regions[k].width, stack.regions[j].width)
    walls = [matsubara_sum(_real(wall), thermal, quad_spec, scale)
             for wall in (kernel_j, kernel_k)]
    # the walls set the absolute accuracy; the difference may vanish
    abs_tol = quad_spec.tolerance * max(abs(w.value) for w in walls)
    result = matsubara_sum(_real(kernel), thermal, quad_spec, scale, abs_tol=abs_tol)
    result = replace(result, evaluations=result.evaluations + sum(w.evaluations for w in walls))
    log_info('force_on_body', gaps=[k, j], value=result.value, walls=[w.value for w in walls],
             error_estimate=result.error_estimate, evaluations=result.evaluations,
             terms=result.terms, temperature=thermal.temperature)
    return result


def gap_body_forces(result: ObservableResult) -> Tuple[float, float]:
    """
    Forces along +z on the bodies left and right of a gap whose wall force
    is `result`. They cancel exactly.
    """
    return -result.value, result.value
