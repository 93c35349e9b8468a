"""
Material models and single-interface reflection/transmission matrices on the
imaginary frequency axis omega = i*xi.

Conventions
-----------
interface_coeffs(left, right) describes the interface between a region made
of `left` (smaller z) and one made of `right`:

    r      reflection of a right-moving wave incident from the left
    t      transmission left -> right
    r_rev  reflection of a left-moving wave incident from the right
    t_rev  transmission right -> left

Dielectrics are diagonal in the TM/TE basis, Weyl semimetals in the +/- basis
(called HELICITY here). The +/- label of a left-moving mode is the label of the
wavenumber it carries, so right- and left-movers change basis with different
matrices: U for right-movers and P*U for left-movers, P being the helicity
parity matrix.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

from .config import EXPONENT_CAP
from .cxmat import CMat, diag, diag_exp, identity, zeros
from .errors import BasisConversionError, DomainError, UnsupportedPairingError


# ============================================================================
# Permittivity models
# ============================================================================

@dataclass(frozen=True)
class Constant:
    eps: float

    def __post_init__(self):
        if not self.eps >= 1.0 or math.isinf(self.eps):
            raise DomainError(f"constant permittivity must be finite and >= 1, got {self.eps}")

    def at(self, xi: float) -> float:
        return self.eps

    def times_xi2(self, xi: float) -> float:
        return self.eps * xi * xi

    def static_limit(self) -> Tuple[int, float]:
        return 0, self.eps


@dataclass(frozen=True)
class Plasma:
    omega_p: float

    def __post_init__(self):
        if not self.omega_p > 0.0:
            raise DomainError(f"plasma frequency must be positive, got {self.omega_p}")

    def at(self, xi: float) -> float:
        if xi == 0.0:
            return math.inf
        return 1.0 + (self.omega_p / xi) ** 2

    def times_xi2(self, xi: float) -> float:
        return xi * xi + self.omega_p ** 2

    def static_limit(self) -> Tuple[int, float]:
        return 2, self.omega_p ** 2


@dataclass(frozen=True)
class Drude:
    omega_p: float
    gamma: float

    def __post_init__(self):
        if not self.omega_p > 0.0:
            raise DomainError(f"plasma frequency must be positive, got {self.omega_p}")
        if not self.gamma >= 0.0:
            raise DomainError(f"relaxation rate must be >= 0, got {self.gamma}")

    def at(self, xi: float) -> float:
        if xi == 0.0:
            return math.inf
        return 1.0 + self.omega_p ** 2 / (xi * (xi + self.gamma))

    def times_xi2(self, xi: float) -> float:
        if self.gamma == 0.0:
            return xi * xi + self.omega_p ** 2
        return xi * xi + self.omega_p ** 2 * xi / (xi + self.gamma)

    def static_limit(self) -> Tuple[int, float]:
        # eps(i*xi) ~ coeff / xi**order as xi -> 0
        if self.gamma == 0.0:
            return 2, self.omega_p ** 2
        return 1, self.omega_p ** 2 / self.gamma


EpsModel = Union[Constant, Plasma, Drude]


# ============================================================================
# Materials
# ============================================================================

@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class PerfectConductor:
    pass


@dataclass(frozen=True)
class Dielectric:
    eps_model: EpsModel


@dataclass(frozen=True)
class Weyl:
    b: float  # node separation along +z, inverse length

    def __post_init__(self):
        if not math.isfinite(self.b):
            raise DomainError(f"Weyl node separation must be finite, got {self.b}")


Material = Union[Vacuum, PerfectConductor, Dielectric, Weyl]

_VACUUM_EPS = Constant(1.0)


def effective(m: Material) -> Material:
    """Weyl(b=0) is vacuum."""
    if isinstance(m, Weyl) and m.b == 0.0:
        return Vacuum()
    return m


def is_reciprocal(m: Material) -> bool:
    return not isinstance(effective(m), Weyl)


def material_label(m: Material) -> str:
    if isinstance(m, Dielectric):
        return f"Dielectric({m.eps_model})"
    if isinstance(m, Weyl):
        return f"Weyl(b={m.b})"
    return type(m).__name__


def _eps_model(m: Material) -> EpsModel:
    return m.eps_model if isinstance(m, Dielectric) else _VACUUM_EPS


# ============================================================================
# Bases
# ============================================================================

class Basis(Enum):
    TMTE = 'tmte'
    HELICITY = 'helicity'

    @property
    def parity_matrix(self) -> CMat:
        if self is Basis.HELICITY:
            return CMat([[0, 1], [1, 0]])
        return identity(2)


_SQRT_HALF = 1.0 / math.sqrt(2.0)
_MIX = CMat([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]])  # involution


def native_basis(m: Material) -> Basis:
    return Basis.HELICITY if isinstance(effective(m), Weyl) else Basis.TMTE


def mover_maps(source: Basis, target: Basis) -> Tuple[CMat, CMat, CMat, CMat]:
    """(right, right_inv, left, left_inv) amplitude maps from `source` to `target`."""
    if source is target:
        one = identity(2)
        return one, one, one, one
    swap = Basis.HELICITY.parity_matrix
    to_left = swap @ _MIX
    if target is Basis.HELICITY:
        return _MIX, _MIX, to_left, _MIX @ swap
    return _MIX, _MIX, _MIX @ swap, to_left


def convert_right(m: CMat, source: Basis, target: Basis) -> CMat:
    """Operator acting within the right-moving sector (t, propagation, wavenumbers)."""
    if source is target:
        return m
    right, right_inv, _, _ = mover_maps(source, target)
    return right @ m @ right_inv


def convert_left(m: CMat, source: Basis, target: Basis) -> CMat:
    if source is target:
        return m
    _, _, left, left_inv = mover_maps(source, target)
    return left @ m @ left_inv


def convert_right_to_left(m: CMat, source: Basis, target: Basis) -> CMat:
    """Operator turning right-movers into left-movers (r, R^{(N+1|j)})."""
    if source is target:
        return m
    _, right_inv, left, _ = mover_maps(source, target)
    return left @ m @ right_inv


def convert_left_to_right(m: CMat, source: Basis, target: Basis) -> CMat:
    """Operator turning left-movers into right-movers (r_rev, R^{(0|j)})."""
    if source is target:
        return m
    right, _, _, left_inv = mover_maps(source, target)
    return right @ m @ left_inv


# ============================================================================
# Coefficients
# ============================================================================

@dataclass(frozen=True)
class CoeffPair:
    r: CMat
    t: CMat
    r_rev: CMat
    t_rev: CMat
    basis: Basis

    def reversed(self) -> 'CoeffPair':
        """The same interface or segment seen with left and right exchanged."""
        return CoeffPair(self.r_rev, self.t_rev, self.r, self.t, self.basis)


def change_basis(c: CoeffPair, target: Basis) -> CoeffPair:
    if c.basis is target:
        return c
    src = c.basis
    return CoeffPair(
        r=convert_right_to_left(c.r, src, target),
        t=convert_right(c.t, src, target),
        r_rev=convert_left_to_right(c.r_rev, src, target),
        t_rev=convert_left(c.t_rev, src, target),
        basis=target,
    )


@dataclass(frozen=True)
class WaveNumbers:
    """Imaginary-axis wavenumbers k_hat per polarization, in the material's native order."""
    values: Tuple[complex, ...]
    basis: Basis

    @property
    def n(self) -> int:
        return len(self.values)


def _check_point(xi: float, kpar: float):
    if xi < 0.0 or kpar < 0.0:
        raise DomainError(f"spectral point must be non-negative, got xi={xi}, kpar={kpar}")
    if xi == 0.0 and kpar == 0.0:
        raise DomainError("spectral point (xi, kpar) = (0, 0) is excluded")


def wavenumbers(m: Material, xi: float, kpar: float) -> WaveNumbers:
    _check_point(xi, kpar)
    m = effective(m)
    if isinstance(m, PerfectConductor):
        raise DomainError("a perfect conductor carries no propagating field")
    if isinstance(m, Weyl):
        kappa = math.hypot(kpar, xi)
        plus = cmath.sqrt(kappa * complex(kappa, -m.b))
        minus = cmath.sqrt(kappa * complex(kappa, m.b))
        return WaveNumbers((plus, minus), Basis.HELICITY)
    k = math.sqrt(kpar * kpar + _eps_model(m).times_xi2(xi))
    return WaveNumbers((complex(k), complex(k)), Basis.TMTE)


def fresnel_tmte(eps1: complex, eps2: complex, kz1: complex, kz2: complex):
    """(R_TM, R_TE, T_TM, T_TE) for incidence from medium 1; valid on either axis."""
    tm_den = eps2 * kz1 + eps1 * kz2
    te_den = kz1 + kz2
    return ((eps2 * kz1 - eps1 * kz2) / tm_den,
            (kz1 - kz2) / te_den,
            2.0 * cmath.sqrt(eps1 * eps2) * kz1 / tm_den,
            2.0 * kz1 / te_den)


def weyl_fresnel(omega: complex, kpar: float, kappa: complex, kz: complex):
    """(R, T, T') of one +/- mode for vacuum -> Weyl; valid on either axis."""
    norm = cmath.sqrt((kappa ** 4 + omega ** 2 * kappa ** 2 + kpar ** 2 * kz ** 2) / 2.0)
    den = kz + kappa
    return ((kz - kappa) / den,
            2.0 * norm / omega / den,
            2.0 * omega / norm * kz * kappa / den)


def _dielectric_coeffs(left: Material, right: Material, xi: float, kpar: float) -> CoeffPair:
    e1, e2 = _eps_model(left), _eps_model(right)
    k1 = wavenumbers(left, xi, kpar).values[0].real
    k2 = wavenumbers(right, xi, kpar).values[0].real
    if xi > 0.0:
        r_tm, r_te, t_tm, t_te = fresnel_tmte(e1.at(xi), e2.at(xi), k1, k2)
        rr_tm, rr_te, t_tm_rev, t_te_rev = fresnel_tmte(e2.at(xi), e1.at(xi), k2, k1)
    else:
        r_tm, t_tm = _static_tm(e1, e2, k1, k2)
        rr_tm, t_tm_rev = _static_tm(e2, e1, k2, k1)
        r_te, t_te = (k1 - k2) / (k1 + k2), 2.0 * k1 / (k1 + k2)
        rr_te, t_te_rev = -r_te, 2.0 * k2 / (k1 + k2)
    return CoeffPair(
        r=diag((r_tm, r_te)), t=diag((t_tm, t_te)),
        r_rev=diag((rr_tm, rr_te)), t_rev=diag((t_tm_rev, t_te_rev)),
        basis=Basis.TMTE,
    )


def _static_tm(e1: EpsModel, e2: EpsModel, k1: float, k2: float) -> Tuple[float, float]:
    """TM coefficients at xi = 0, where metallic permittivities diverge."""
    p1, c1 = e1.static_limit()
    p2, c2 = e2.static_limit()
    if p2 > p1:
        return 1.0, 0.0
    if p1 > p2:
        return -1.0, 0.0
    den = c2 * k1 + c1 * k2
    return (c2 * k1 - c1 * k2) / den, 2.0 * math.sqrt(c1 * c2) * k1 / den


def _weyl_vacuum_coeffs(weyl: Weyl, xi: float, kpar: float) -> Tuple[CMat, CMat, CMat]:
    """diag(R), diag(T), diag(T') for vacuum on the left of a Weyl half-space."""
    kappa = math.hypot(kpar, xi)
    kz = wavenumbers(weyl, xi, kpar).values
    refl, trans, trans_rev = [], [], []
    for k in kz:
        if xi <= 1e-8 * kappa:
            # 2N/omega is singular at xi = 0; only T*T' enters observables
            r = (k - kappa) / (k + kappa)
            t = cmath.sqrt(1.0 - r * r)
            refl.append(r)
            trans.append(t)
            trans_rev.append(t)
        else:
            r, t, tp = weyl_fresnel(1j * xi, kpar, 1j * kappa, 1j * k)
            refl.append(r)
            trans.append(t)
            trans_rev.append(tp)
    return diag(refl), diag(trans), diag(trans_rev)


def check_pairing(left: Material, right: Material):
    """Raise UnsupportedPairingError for interfaces without derived coefficients."""
    left, right = effective(left), effective(right)
    if isinstance(left, PerfectConductor) and isinstance(right, PerfectConductor):
        raise UnsupportedPairingError("two perfect conductors cannot share an interface")
    if isinstance(left, PerfectConductor) or isinstance(right, PerfectConductor):
        return
    if isinstance(left, Weyl) and isinstance(right, Weyl):
        if left.b != right.b:
            raise UnsupportedPairingError(
                f"Weyl|Weyl interface with different node separations ({left.b}, {right.b})")
        return
    for m, other in ((left, right), (right, left)):
        if isinstance(m, Weyl) and not isinstance(other, Vacuum):
            raise UnsupportedPairingError(
                f"Weyl semimetal is only supported against Vacuum or a perfect conductor, "
                f"not {material_label(other)}")


def _native_coeffs(left: Material, right: Material, xi: float, kpar: float) -> CoeffPair:
    if left == right:
        one, nil = identity(2), zeros(2)
        return CoeffPair(nil, one, nil, one, native_basis(left))
    nil = zeros(2)
    if isinstance(right, PerfectConductor):
        return CoeffPair(diag((1.0, -1.0)), nil, nil, nil, Basis.TMTE)
    if isinstance(left, PerfectConductor):
        return CoeffPair(nil, nil, diag((1.0, -1.0)), nil, Basis.TMTE)
    if isinstance(right, Weyl):
        refl, trans, trans_rev = _weyl_vacuum_coeffs(right, xi, kpar)
        return CoeffPair(refl, trans, -refl, trans_rev, Basis.HELICITY)
    if isinstance(left, Weyl):
        refl, trans, trans_rev = _weyl_vacuum_coeffs(left, xi, kpar)
        return CoeffPair(-refl, trans_rev, refl, trans, Basis.HELICITY)
    return _dielectric_coeffs(left, right, xi, kpar)


def interface_coeffs(left: Material, right: Material, xi: float, kpar: float,
                     basis: Basis, allow_conversion: bool = True) -> CoeffPair:
    _check_point(xi, kpar)
    check_pairing(left, right)
    left, right = effective(left), effective(right)
    c = _native_coeffs(left, right, xi, kpar)
    if c.basis is not basis and not allow_conversion:
        raise BasisConversionError(
            f"{material_label(left)}|{material_label(right)} coefficients are derived in "
            f"the {c.basis.value} basis and conversion is disabled")
    return change_basis(c, basis)


# ============================================================================
# Propagation inside a region
# ============================================================================

def wavenumber_matrices(m: Material, xi: float, kpar: float, basis: Basis) -> Tuple[CMat, CMat]:
    """k_hat as operators on (right-movers, left-movers) in `basis`."""
    wn = wavenumbers(m, xi, kpar)
    k = diag(wn.values)
    return convert_right(k, wn.basis, basis), convert_left(k, wn.basis, basis)


def propagation(m: Material, xi: float, kpar: float, width: float, basis: Basis,
                branch: int = 1) -> Tuple[CMat, CMat]:
    """
    e^{-branch * k_hat * width} for (right-movers, left-movers) across a region.

    branch = 1 is the decaying physical continuation; thicker-than-cap layers
    are opaque. branch = -1 grows and raises ExponentOverflowError past the cap.
    """
    if width == 0.0:
        one = identity(2)
        return one, one
    wn = wavenumbers(m, xi, kpar)
    if branch == 1:
        if math.isinf(width):
            nil = zeros(2)
            return nil, nil
        exps = [0.0 if (k * width).real > EXPONENT_CAP else cmath.exp(-k * width)
                for k in wn.values]
        factor = diag(exps)
    else:
        factor = diag_exp([k * width for k in wn.values])
    if wn.values[0] == wn.values[1]:
        return factor, factor
    return convert_right(factor, wn.basis, basis), convert_left(factor, wn.basis, basis)


def max_off_diagonal(*mats: CMat) -> float:
    return max((m.off_diagonal_norm() for m in mats), default=0.0)