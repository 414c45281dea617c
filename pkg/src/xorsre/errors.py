"""Exception types shared across the package.

Each class maps to one CLI exit code (see ``xorsre.cli``).
"""


class SREError(Exception):
    """Base class for every error raised by xorsre."""

    exit_code = 1


class InvalidInputError(SREError, ValueError):
    exit_code = 2


class NormalizationError(InvalidInputError):
    """State norm too far from 1 to be silently renormalized."""


class ResourceError(SREError, MemoryError):
    """Requested size exceeds a memory or enumeration guard."""

    exit_code = 3


class ConsistencyError(SREError, ArithmeticError):
    """A quantity violated an analytic bound beyond rounding tolerance."""

    exit_code = 4
