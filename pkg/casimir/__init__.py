"""Casimir energy and force for plane-parallel multilayer stacks."""

from .config import VERSION as __version__
from .errors import (
    CasimirError, ConfigError, ConvergenceError, DomainError, IdentityViolation,
    NotDiagonalError, RecursionSingularError, StackError, UnsupportedPairingError,
)
from .force import ForceQuery, force_diagonal, force_general, force_on_body, gap_body_forces
from .materials import (
    Basis, Constant, Dielectric, Drude, PerfectConductor, Plasma, Vacuum, Weyl,
    interface_coeffs,
)
from .spectral import char_fn, tilde_char_fn
from .stack import LayerStack, Region, Segment, segment_coeffs
from .thermo import (
    ObservableResult, QuadratureSpec, ThermalSpec, casimir_energy, matsubara_sum, work,
)

__all__ = [
    '__version__',
    'Basis', 'Constant', 'Dielectric', 'Drude', 'PerfectConductor', 'Plasma', 'Vacuum', 'Weyl',
    'LayerStack', 'Region', 'Segment', 'segment_coeffs', 'interface_coeffs',
    'char_fn', 'tilde_char_fn',
    'ThermalSpec', 'QuadratureSpec', 'ObservableResult', 'casimir_energy', 'work',
    'matsubara_sum',
    'ForceQuery', 'force_general', 'force_diagonal', 'force_on_body', 'gap_body_forces',
    'CasimirError', 'ConfigError', 'ConvergenceError', 'DomainError', 'IdentityViolation',
    'NotDiagonalError', 'RecursionSingularError', 'StackError', 'UnsupportedPairingError',
]
