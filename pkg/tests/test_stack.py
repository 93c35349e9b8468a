import cmath
import math

from hypothesis import given, settings
from hypothesis.strategies import floats, integers
from pytest import approx, mark, raises

from casimir.config import FAR_BOUNDARY_FACTOR, FAR_BOUNDARY_SCALE
from casimir.cxmat import identity, zeros
from casimir.errors import StackError, UnsupportedPairingError
from casimir.materials import (
    Basis, Constant, Dielectric, PerfectConductor, Plasma, Vacuum, Weyl, change_basis,
    interface_coeffs, wavenumbers,
)
from casimir.stack import (
    LayerStack, Region, Segment, boundary_reflection, inverse_transfer_matrix, left_reflections,
    right_reflections, segment_coeffs, transfer_matrix,
)

from .oracles import fabry_perot, slab_reflection
from .strategies import dielectric_stacks, spectral_points, weyl_stacks

POINTS = [(0.1, 0.2), (0.5, 0.05), (1.3, 0.9), (0.05, 2.0)]


def _same(a, b, tol=1e-11):
    for x, y in ((a.r, b.r), (a.t, b.t), (a.r_rev, b.r_rev), (a.t_rev, b.t_rev)):
        if not x.allclose(y, rtol=tol, atol=tol):
            return False
    return True


@given(floats(1.5, 8.0), floats(0.1, 1.0), spectral_points)
def test_fabry_perot_series(eps, width, point):
    xi, kpar = point
    outer, slab, back = Dielectric(Constant(3.0)), Dielectric(Constant(eps)), Dielectric(Plasma(1.0))
    stack = LayerStack.from_layers([(outer, math.inf), (slab, width), (back, math.inf)])
    c = segment_coeffs(stack, Segment(0, 2), xi, kpar, Basis.TMTE)
    c12 = interface_coeffs(outer, slab, xi, kpar, Basis.TMTE)
    c23 = interface_coeffs(slab, back, xi, kpar, Basis.TMTE)
    phase = cmath.exp(-wavenumbers(slab, xi, kpar).values[0] * width)
    for lam in (0, 1):
        refl, trans = fabry_perot(c12.r[lam, lam], c12.t[lam, lam], c12.r_rev[lam, lam],
                                  c12.t_rev[lam, lam], c23.r[lam, lam], phase, round_trips=2000)
        assert abs(c.r[lam, lam] - refl) <= 1e-12
        assert abs(c.t[lam, lam] - c23.t[lam, lam] * trans) <= 1e-12


@mark.parametrize('xi, kpar', POINTS)
def test_free_standing_slab(xi, kpar):
    stack = LayerStack.from_layers([(Vacuum(), math.inf), (Dielectric(Constant(4.0)), 0.7),
                                    (Vacuum(), math.inf)])
    r = segment_coeffs(stack, Segment(0, 2), xi, kpar, Basis.TMTE).r
    r_tm, r_te = slab_reflection(4.0, 0.7, xi, kpar)
    assert abs(r[0, 0] - r_tm) <= 1e-13 and abs(r[1, 1] - r_te) <= 1e-13


@settings(max_examples=50)
@given(dielectric_stacks(min_interior=2), spectral_points)
def test_insertion_at_every_split(stack, point):
    xi, kpar = point
    whole = Segment(0, stack.N + 1)
    ref = segment_coeffs(stack, whole, xi, kpar, Basis.TMTE)
    for split in range(1, stack.N + 1):
        assert _same(ref, segment_coeffs(stack, whole, xi, kpar, Basis.TMTE, split=split))


@settings(max_examples=50)
@given(weyl_stacks(conductors=False), spectral_points)
def test_insertion_with_weyl_layers(stack, point):
    xi, kpar = point
    whole = Segment(0, stack.N + 1)
    ref = segment_coeffs(stack, whole, xi, kpar, Basis.HELICITY)
    for split in range(1, stack.N + 1):
        assert _same(ref, segment_coeffs(stack, whole, xi, kpar, Basis.HELICITY, split=split))
    tmte = segment_coeffs(stack, whole, xi, kpar, Basis.TMTE)
    assert _same(change_basis(ref, Basis.TMTE), tmte)


@given(dielectric_stacks(min_interior=2), spectral_points)
def test_reversed_segment(stack, point):
    xi, kpar = point
    forward = segment_coeffs(stack, Segment(1, stack.N + 1), xi, kpar, Basis.TMTE)
    backward = segment_coeffs(stack, Segment(stack.N + 1, 1), xi, kpar, Basis.TMTE)
    assert _same(forward.reversed(), backward, tol=0.0)


@settings(max_examples=50)
@given(dielectric_stacks(conductors=False), integers(1, 4), spectral_points)
def test_zero_width_layer_is_invisible(stack, position, point):
    xi, kpar = point
    position = min(position, stack.N + 1)
    padded = stack.insert_layer(position, Dielectric(Constant(7.0)), 0.0)
    a = segment_coeffs(stack, Segment(0, stack.N + 1), xi, kpar, Basis.TMTE)
    b = segment_coeffs(padded, Segment(0, padded.N + 1), xi, kpar, Basis.TMTE)
    assert _same(a, b)


@mark.parametrize('xi, kpar', POINTS)
def test_ladders_match_segments(metal_stack, xi, kpar):
    for j in range(1, metal_stack.N + 1):
        left = left_reflections(metal_stack, j, xi, kpar, Basis.TMTE)[-1]
        right = right_reflections(metal_stack, j, xi, kpar, Basis.TMTE)[0]
        assert left.allclose(segment_coeffs(metal_stack, Segment(0, j), xi, kpar, Basis.TMTE).r_rev,
                             atol=1e-11)
        end = Segment(j, metal_stack.N + 1)
        assert right.allclose(segment_coeffs(metal_stack, end, xi, kpar, Basis.TMTE).r, atol=1e-11)


@mark.parametrize('fixture_name', ['metal_stack', 'weyl_stack', 'open_slab_stack'])
@mark.parametrize('basis', list(Basis))
def test_boundary_reflection_induction(request, fixture_name, basis):
    stack = request.getfixturevalue(fixture_name)
    for xi, kpar in POINTS:
        for j in range(1, stack.N + 1):
            ladder = left_reflections(stack, j, xi, kpar, basis)[-1]
            assert boundary_reflection(stack, j, 'left', xi, kpar, basis).allclose(
                ladder, rtol=1e-10, atol=1e-10)
            ladder = right_reflections(stack, j, xi, kpar, basis)[0]
            assert boundary_reflection(stack, j, 'right', xi, kpar, basis).allclose(
                ladder, rtol=1e-10, atol=1e-10)
    with raises(StackError):
        boundary_reflection(stack, 1, 'up', 0.1, 0.1, basis)


@mark.parametrize('xi, kpar', POINTS)
def test_transfer_matrix_product(open_slab_stack, xi, kpar):
    stack = open_slab_stack
    total = transfer_matrix(stack, 0, xi, kpar, Basis.TMTE)
    for j in range(1, stack.N + 1):
        total = transfer_matrix(stack, j, xi, kpar, Basis.TMTE) @ total
    ref = segment_coeffs(stack, Segment(0, stack.N + 1), xi, kpar, Basis.TMTE)
    assert _same(ref, total.coeffs(Basis.TMTE), tol=1e-9)


@mark.parametrize('j', [0, 1, 2, 3])
def test_inverse_transfer_matrix(open_slab_stack, j):
    m = transfer_matrix(open_slab_stack, j, 0.4, 0.6, Basis.HELICITY)
    inv = inverse_transfer_matrix(open_slab_stack, j, 0.4, 0.6, Basis.HELICITY)
    product = inv @ m
    one, nil = identity(2), zeros(2)
    assert product.a.allclose(one, atol=1e-10) and product.d.allclose(one, atol=1e-10)
    assert product.b.allclose(nil, atol=1e-10) and product.c.allclose(nil, atol=1e-10)


def test_stack_properties(metal_stack, open_slab_stack, weyl_stack):
    assert metal_stack.N == 3
    assert metal_stack.interface_positions == approx((0.0, 0.4, 1.4, 2.0))
    assert metal_stack.smallest_width() == 0.4
    assert metal_stack.conductor_bounded and metal_stack.reciprocal
    assert not open_slab_stack.conductor_bounded
    assert not weyl_stack.reciprocal
    assert metal_stack.with_width(2, 3.0).widths[2] == 3.0


@mark.parametrize('layers', [
    [(Vacuum(), math.inf)],
    [(Vacuum(), 1.0), (Vacuum(), math.inf)],
    [(Vacuum(), math.inf), (Vacuum(), -1.0), (Vacuum(), math.inf)],
    [(Vacuum(), math.inf), (Vacuum(), math.inf), (Vacuum(), math.inf)],
    [(Vacuum(), math.inf), (PerfectConductor(), 1.0), (Vacuum(), math.inf)],
])
def test_invalid_stacks(layers):
    with raises(StackError):
        LayerStack.from_layers(layers)


def test_unsupported_neighbours():
    with raises(UnsupportedPairingError):
        LayerStack.from_layers([(Vacuum(), math.inf), (Weyl(0.5), 1.0),
                                (Dielectric(Constant(2.0)), 1.0), (Vacuum(), math.inf)])


def test_index_errors(metal_stack):
    for bad in (0, 4):
        with raises(StackError):
            metal_stack.check_interior(bad)
    with raises(StackError):
        metal_stack.insert_layer(0, Vacuum(), 1.0)
    for seg in (Segment(2, 2), Segment(0, 5), Segment(-1, 2)):
        with raises(StackError):
            segment_coeffs(metal_stack, seg, 0.1, 0.1, Basis.TMTE)
    with raises(StackError):
        segment_coeffs(metal_stack, Segment(0, 4), 0.1, 0.1, Basis.TMTE, split=4)
    with raises(StackError):
        transfer_matrix(metal_stack, 4, 0.1, 0.1, Basis.TMTE)


def test_pad_far_boundaries(open_slab_stack):
    padded = open_slab_stack.pad_far_boundaries()
    target = FAR_BOUNDARY_FACTOR * FAR_BOUNDARY_SCALE * 0.8
    assert padded.widths[1] == approx(target) and padded.widths[3] == approx(target)
    assert padded.widths[2] == 0.8
    assert open_slab_stack.pad_far_boundaries(k_min=1.0).widths[1] == FAR_BOUNDARY_FACTOR
    two = LayerStack((Region(Vacuum(), math.inf), Region(Vacuum(), 1.0),
                      Region(Dielectric(Constant(2.0)), 1.0), Region(Vacuum(), math.inf)))
    with raises(StackError):
        two.pad_far_boundaries()
