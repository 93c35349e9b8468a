"""Exception hierarchy shared by every casimir module."""

from typing import Any, Optional


class CasimirError(Exception):
    """Base class for all library errors."""


class DimensionError(CasimirError):
    pass


class SingularMatrixError(CasimirError):
    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class ExponentOverflowError(CasimirError):
    pass


class DomainError(CasimirError):
    pass


class UnsupportedPairingError(CasimirError):
    pass


class BasisConversionError(CasimirError):
    pass


class StackError(CasimirError):
    pass


class RecursionSingularError(CasimirError):
    """Resonant denominator while folding a stack; `index` is the intermediate region."""

    def __init__(self, message: str, index: int, condition: float = float('inf')):
        super().__init__(f"{message} at intermediate region {index}")
        self.index = index
        self.condition = condition


class ConvergenceError(CasimirError):
    """Tolerance not reached; `partial` holds the best available ObservableResult."""

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class ConfigError(CasimirError):
    def __init__(self, message: str, path: str = '', line: Optional[int] = None):
        where = path or '<document>'
        if line is not None:
            where = f"{where} (line {line})"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
        self.reason = message


class IdentityViolation(CasimirError):
    pass


class NotDiagonalError(CasimirError):
    """Scattering data has off-diagonal entries where a diagonal formula was requested."""
