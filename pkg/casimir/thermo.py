"""
Casimir free energy per unit area from the imaginary-axis characteristic
functions, summed over Matsubara frequencies xi_l = 2*pi*T*l:

    F = T sum'_l  int k dk / (2 pi)  ln tilde_f(i xi_l, k)

with the l = 0 term weighted by 1/2. At T = 0 the sum becomes int dxi / (2 pi),
taken over the (xi, k) quarter plane in polar coordinates.

Radial integrals run in the decay variable u = 2 * scale * k (or 2 * scale * rho),
where `scale` is the smallest variable width, so the integrand falls off at
least like e^{-u} and [0, ln(1/tol) + TAIL_MARGIN] holds all but a negligible
tail.

Usage:
    from casimir.thermo import ThermalSpec, casimir_energy
    result = casimir_energy(stack, ThermalSpec(temperature=0.0))
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

from scipy.integrate import quad

from .config import (
    ANGLE_PANELS, DEFAULT_THREADS, DEFAULT_TOLERANCE, IMAG_RESIDUE_TOLERANCE,
    MATSUBARA_STALL_TERMS, MAX_EVALUATIONS, MAX_MATSUBARA_TERMS, QUAD_LIMIT, TAIL_MARGIN,
)
from .errors import ConvergenceError, DomainError, StackError
from .logging_utils import log_info, log_warn
from .materials import Basis
from .spectral import Triple, char_fn, ordered_triple, tilde_char_fn
from .stack import LayerStack

MIN_EPSREL = 1e-13

Kernel = Callable[[float, float, 'Tally'], float]


# ============================================================================
# Specs and results
# ============================================================================

@dataclass(frozen=True)
class ThermalSpec:
    temperature: float = 0.0  # inverse length, hbar = c = k_B = 1

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature >= 0.0):
            raise DomainError(f"temperature must be finite and >= 0, got {self.temperature}")

    def xi(self, l: int) -> float:
        return 2.0 * math.pi * self.temperature * l


@dataclass(frozen=True)
class QuadratureSpec:
    tolerance: float = DEFAULT_TOLERANCE
    max_evaluations: int = MAX_EVALUATIONS
    richardson: bool = False
    threads: int = DEFAULT_THREADS
    max_terms: int = MAX_MATSUBARA_TERMS
    scale: Optional[float] = None  # overrides the smallest-width decay scale

    def __post_init__(self):
        if not 1e-12 <= self.tolerance < 1.0:
            raise DomainError(f"tolerance must lie in [1e-12, 1), got {self.tolerance}")
        if self.max_evaluations < 1 or self.max_terms < 1:
            raise DomainError("max_evaluations and max_terms must be positive")
        if self.threads < 1:
            raise DomainError(f"threads must be >= 1, got {self.threads}")
        if self.scale is not None and not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError(f"quadrature scale must be positive, got {self.scale}")

    @property
    def u_max(self) -> float:
        return math.log(1.0 / self.tolerance) + TAIL_MARGIN


@dataclass(frozen=True)
class ObservableResult:
    value: float
    error_estimate: float
    evaluations: int
    terms: int                  # Matsubara terms kept; 0 for the T = 0 integral
    imag_residue: float = 0.0   # largest |Im|/|value| seen at a spectral point
    flagged: int = 0            # spectral points with a large residue or Re f <= 0
    excluded: int = 0           # points left out of the quadrature because Re f <= 0
    converged: bool = True


class Tally:
    """Per-task bookkeeping; tasks run on separate tallies that are merged in order."""

    def __init__(self):
        self.evaluations = 0
        self.imag_residue = 0.0
        self.flagged = 0
        self.excluded = 0
        self.failures = 0
        self.inner_error = 0.0

    def observe(self, z: complex):
        mag = abs(z)
        if mag == 0.0:
            return
        ratio = abs(z.imag) / mag
        self.imag_residue = max(self.imag_residue, ratio)
        if ratio > IMAG_RESIDUE_TOLERANCE:
            self.flagged += 1

    def merge(self, other: 'Tally'):
        self.evaluations += other.evaluations
        self.imag_residue = max(self.imag_residue, other.imag_residue)
        self.flagged += other.flagged
        self.excluded += other.excluded
        self.failures += other.failures
        self.inner_error = max(self.inner_error, other.inner_error)


class ExcludedPoint(Exception):
    """Raised by a kernel whose logarithm has no real branch at this point."""


# ============================================================================
# Quadrature
# ============================================================================

def _quad(fn: Callable[[float], float], a: float, b: float, epsrel: float,
          epsabs: float) -> Tuple[float, float, bool]:
    out = quad(fn, a, b, epsabs=epsabs, epsrel=max(epsrel, MIN_EPSREL),
               limit=QUAD_LIMIT, full_output=1)
    value, err = out[0], out[1]
    ok = len(out) == 3 or err <= 10.0 * (epsrel * abs(value) + epsabs)
    return value, err, ok


def _sample(kernel: Kernel, xi: float, kpar: float, tally: Tally) -> float:
    tally.evaluations += 1
    try:
        return kernel(xi, kpar, tally)
    except ExcludedPoint:
        # adaptive subdivision isolates the point; it contributes nothing
        tally.flagged += 1
        tally.excluded += 1
        return 0.0


def _kpar_integral(kernel: Kernel, xi: float, scale: float, u_max: float, epsrel: float,
                   epsabs: float, tally: Tally) -> Tuple[float, float]:
    """int k dk / (2 pi) kernel(xi, k), returned with its error estimate."""
    half = 0.5 / scale
    factor = half / (2.0 * math.pi)

    def integrand(u: float) -> float:
        kpar = u * half
        return kpar * _sample(kernel, xi, kpar, tally)

    value, err, ok = _quad(integrand, 0.0, u_max, epsrel, epsabs / factor)
    if not ok:
        tally.failures += 1
    tally.inner_error = max(tally.inner_error, err * factor)
    return value * factor, err * factor


def _radial_integral(kernel: Kernel, theta: float, scale: float, u_max: float, epsrel: float,
                     epsabs: float, tally: Tally) -> Tuple[float, float]:
    """int rho^2 cos(theta) kernel drho along the ray xi = rho sin(theta), k = rho cos(theta)."""
    half = 0.5 / scale
    c, s = math.cos(theta), math.sin(theta)

    def integrand(u: float) -> float:
        rho = u * half
        return rho * rho * c * _sample(kernel, rho * s, rho * c, tally)

    value, err, ok = _quad(integrand, 0.0, u_max, epsrel, epsabs / half)
    if not ok:
        tally.failures += 1
    tally.inner_error = max(tally.inner_error, err * half)
    return value * half, err * half


def _zero_temperature(kernel: Kernel, quad_spec: QuadratureSpec, scale: float,
                      abs_tol: float) -> Tuple[float, float, int, Tally]:
    """(1 / 4 pi^2) int_0^{pi/2} dtheta int rho^2 cos(theta) kernel drho."""
    u_max = quad_spec.u_max
    tol = quad_spec.tolerance
    factor = 1.0 / (4.0 * math.pi ** 2)
    quarter = 0.5 * math.pi

    # the diagonal ray fixes the absolute accuracy every other ray needs
    pilot_tally = Tally()
    pilot, _ = _radial_integral(kernel, 0.5 * quarter, scale, u_max, tol, abs_tol / factor,
                                pilot_tally)
    ray_abs = max(abs_tol / factor / quarter, tol * abs(pilot))
    edges = [quarter * i / ANGLE_PANELS for i in range(ANGLE_PANELS + 1)]
    panels = list(zip(edges[:-1], edges[1:]))

    def panel(bounds: Tuple[float, float]) -> Tuple[float, float, Tally]:
        tally = Tally()

        def outer(theta: float) -> float:
            value, _ = _radial_integral(kernel, theta, scale, u_max, tol / 10.0,
                                        ray_abs / 10.0, tally)
            return value

        value, err, ok = _quad(outer, bounds[0], bounds[1], tol,
                               ray_abs * (bounds[1] - bounds[0]))
        if not ok:
            tally.failures += 1
        err += (bounds[1] - bounds[0]) * tally.inner_error
        return value * factor, err * factor, tally

    with ThreadPoolExecutor(max_workers=quad_spec.threads) as pool:
        parts = list(pool.map(panel, panels))
    tally = pilot_tally
    tally.failures = 0
    for _, _, part in parts:
        tally.merge(part)
    value = math.fsum(p[0] for p in parts)
    error = math.fsum(p[1] for p in parts)
    return value, error, 0, tally


def _richardson_tail(terms: Sequence[float]) -> float:
    """Geometric-series remainder estimated from the last two terms."""
    if len(terms) < 2 or terms[-2] == 0.0:
        return 0.0
    q = terms[-1] / terms[-2]
    if not 0.0 < q < 1.0:
        return 0.0
    return terms[-1] * q / (1.0 - q)


def _finite_temperature(kernel: Kernel, thermal: ThermalSpec, quad_spec: QuadratureSpec,
                        scale: float, abs_tol: float) -> Tuple[float, float, int, Tally, bool]:
    temp = thermal.temperature
    tol = quad_spec.tolerance
    floor = abs_tol / temp / 10.0

    def term(l: int) -> Tuple[float, float, Tally]:
        tally = Tally()
        value, err = _kpar_integral(kernel, thermal.xi(l), scale, quad_spec.u_max, tol / 10.0,
                                    floor, tally)
        weight = 0.5 if l == 0 else 1.0
        return weight * value, weight * err, tally

    terms: List[float] = []
    errors: List[float] = []
    tally = Tally()
    stalled = 0

    def record(value: float, err: float, part: Tally) -> bool:
        """Keep one term; True once the sum is truncated or broken."""
        nonlocal stalled
        terms.append(value)
        errors.append(err)
        tally.merge(part)
        if not math.isfinite(value):
            return True
        running = math.fsum(terms)
        if temp * abs(value) <= tol * temp * abs(running) + abs_tol:
            stalled += 1
        else:
            stalled = 0
        return stalled >= MATSUBARA_STALL_TERMS

    # the static term is the largest; it sets the absolute accuracy of the rest
    done = record(*term(0))
    if math.isfinite(terms[0]):
        floor = max(floor, 0.1 * tol * 2.0 * abs(terms[0]))
    with ThreadPoolExecutor(max_workers=quad_spec.threads) as pool:
        while (not done and len(terms) < quad_spec.max_terms
               and tally.evaluations <= quad_spec.max_evaluations):
            start = len(terms)
            batch = range(start, min(start + quad_spec.threads, quad_spec.max_terms))
            for part in pool.map(term, batch):
                done = record(*part)
                if done:
                    break
    truncated = stalled >= MATSUBARA_STALL_TERMS and math.isfinite(terms[-1])
    tail = _richardson_tail(terms) if quad_spec.richardson else 0.0
    value = temp * (math.fsum(terms) + tail)
    error = temp * (math.fsum(errors) + abs(terms[-1]) + abs(tail))
    return value, error, len(terms), tally, truncated


def matsubara_sum(kernel: Kernel, thermal: ThermalSpec, quad_spec: QuadratureSpec,
                  scale: float, abs_tol: float = 0.0) -> ObservableResult:
    """
    T sum'_l int k dk/(2 pi) kernel(xi_l, k), or the xi integral at T = 0.

    `kernel(xi, kpar, tally)` returns a real number and reports the complex
    quantities it was built from through `tally.observe`. A kernel may raise
    ExcludedPoint; that point is flagged and left out. Raises ConvergenceError
    with the partial result when the tolerance, the term limit or the
    evaluation budget is not met.
    """
    if thermal.temperature == 0.0:
        value, error, terms, tally = _zero_temperature(kernel, quad_spec, scale, abs_tol)
        truncated = True
    else:
        value, error, terms, tally, truncated = _finite_temperature(
            kernel, thermal, quad_spec, scale, abs_tol)
    result = ObservableResult(
        value=value,
        error_estimate=error,
        evaluations=tally.evaluations,
        terms=terms,
        imag_residue=tally.imag_residue,
        flagged=tally.flagged,
        excluded=tally.excluded,
    )
    problems = []
    if not math.isfinite(value):
        problems.append("non-finite value")
    elif not truncated:
        problems.append(f"Matsubara sum not truncated after {terms} terms")
    if tally.failures:
        problems.append(f"{tally.failures} quadratures missed the tolerance")
    if tally.evaluations > quad_spec.max_evaluations:
        problems.append(f"evaluation budget {quad_spec.max_evaluations} exceeded")
    if problems:
        message = '; '.join(problems)
        log_warn('matsubara_sum_not_converged', reason=message, value=value,
                 error_estimate=error, evaluations=tally.evaluations, terms=terms)
        raise ConvergenceError(message, partial=replace(result, converged=False))
    if tally.excluded:
        log_warn('matsubara_sum_excluded_points', excluded=tally.excluded, value=value)
    return result


# ============================================================================
# Observables
# ============================================================================

def prepare_stack(stack: LayerStack, far_boundary: bool = False) -> LayerStack:
    """
    Stack actually integrated. Conductor-bounded stacks are padded when
    `far_boundary` is set; open boundaries are accepted only with it.
    """
    for j in range(1, stack.N + 1):
        if stack.regions[j].width <= 0.0:
            raise StackError(f"region {j} has zero width; remove it before integrating")
    if stack.conductor_bounded:
        return stack.pad_far_boundaries() if far_boundary else stack
    if not far_boundary:
        raise StackError("boundaries are not perfect conductors; "
                         "set far_boundary to integrate an open stack")
    return stack


def log_abs_sum(deviations: Sequence[complex], tally: Tally) -> float:
    """
    sum_i ln|1 + d_i| for characteristic values f_i = 1 + d_i, accurate when
    every d_i is tiny. Raises ExcludedPoint when some Re f_i <= 0.
    """
    total = []
    for d in deviations:
        f = 1.0 + d
        if f == 0:
            raise DomainError("characteristic function vanishes on the imaginary axis")
        tally.observe(f)
        if f.real <= 0.0:
            raise ExcludedPoint(f)
        total.append(0.5 * math.log1p(2.0 * d.real + abs(d) ** 2))
    return math.fsum(total)


def casimir_energy(stack: LayerStack, thermal: ThermalSpec = ThermalSpec(),
                   quad_spec: QuadratureSpec = QuadratureSpec(), basis: Basis = Basis.TMTE,
                   split: Optional[int] = None, far_boundary: bool = False) -> ObservableResult:
    """Renormalized free energy per unit area (inverse length cubed)."""
    stack = prepare_stack(stack, far_boundary)

    def kernel(xi: float, kpar: float, tally: Tally) -> float:
        return log_abs_sum(tilde_char_fn(stack, xi, kpar, basis, split).deviations, tally)

    scale = quad_spec.scale or stack.smallest_width()
    result = matsubara_sum(kernel, thermal, quad_spec, scale)
    log_info('casimir_energy', value=result.value, error_estimate=result.error_estimate,
             evaluations=result.evaluations, terms=result.terms,
             temperature=thermal.temperature, regions=len(stack.regions))
    return result


def _works_kernel(stack: LayerStack, plus: Sequence[Triple], minus: Sequence[Triple],
                  basis: Basis) -> Kernel:
    def kernel(xi: float, kpar: float, tally: Tally) -> float:
        up = log_abs_sum([char_fn(stack, t, xi, kpar, basis).deviation for t in plus], tally)
        down = log_abs_sum([char_fn(stack, t, xi, kpar, basis).deviation for t in minus], tally)
        return up - down
    return kernel


def work(stack: LayerStack, triple: Triple, thermal: ThermalSpec = ThermalSpec(),
         quad_spec: QuadratureSpec = QuadratureSpec(), basis: Basis = Basis.TMTE,
         far_boundary: bool = False) -> ObservableResult:
    """Work W(i|k|j) to bring the stacks (i|k) and (k|j) together across gap k."""
    stack = prepare_stack(stack, far_boundary)
    _, k, _ = ordered_triple(stack, triple)
    scale = quad_spec.scale or stack.regions[k].width
    result = matsubara_sum(_works_kernel(stack, [triple], [], basis), thermal, quad_spec, scale)
    log_info('work', triple=list(triple), value=result.value,
             error_estimate=result.error_estimate, evaluations=result.evaluations,
             terms=result.terms, temperature=thermal.temperature)
    return result


def three_body_residual(stack: LayerStack, k: int, j: int, thermal: ThermalSpec = ThermalSpec(),
                        quad_spec: QuadratureSpec = QuadratureSpec(), basis: Basis = Basis.TMTE,
                        far_boundary: bool = False) -> float:
    """
    |W(k|j|N+1) + W(0|k|N+1) - W(0|k|j) - W(0|j|N+1)| / |W(k|j|N+1) + W(0|k|N+1)|.

    The difference is integrated as a single kernel.
    """
    stack = prepare_stack(stack, far_boundary)
    if not 1 <= k < j <= stack.N:
        raise StackError(f"gaps {k} < {j} must both be interior (N = {stack.N})")
    end = stack.N + 1
    lhs = [(k, j, end), (0, k, end)]
    rhs = [(0, k, j), (0, j, end)]
    scale = quad_spec.scale or min(stack.regions[k].width, stack.regions[j].width)
    total = matsubara_sum(_works_kernel(stack, lhs, [], basis), thermal, quad_spec, scale)
    diff = matsubara_sum(_works_kernel(stack, lhs, rhs, basis), thermal, quad_spec, scale,
                         abs_tol=quad_spec.tolerance * abs(total.value) * 1e-3)
    residual = abs(diff.value) if total.value == 0.0 else abs(diff.value) / abs(total.value)
    log_info('three_body_residual', gaps=[k, j], residual=residual, work=total.value)
    return residual
