"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PsicalError`
so that the CLI can map it onto a machine-readable error record.
"""


class PsicalError(Exception):
    """Base class for all package errors."""

    #: short machine-readable tag, used by the CLI error JSON
    code = "error"
    #: process exit status used by the CLI
    exit_status = 3


class InvalidGridError(PsicalError, ValueError):
    code = "invalid-grid"
    exit_status = 2


class AxisRoleError(PsicalError, ValueError):
    code = "axis-role"
    exit_status = 2


class ShapeError(PsicalError, ValueError):
    code = "shape"
    exit_status = 2


class InvalidExponentError(PsicalError, ValueError):
    code = "invalid-exponent"
    exit_status = 2


class DomainError(PsicalError, ValueError):
    code = "domain"
    exit_status = 2


class TruncationError(PsicalError, ArithmeticError):
    code = "truncation"


class WindowError(PsicalError, ValueError):
    code = "window"
    exit_status = 2


class ConsistencyError(PsicalError, ValueError):
    code = "consistency"
    exit_status = 2


class OrderError(PsicalError, ValueError):
    code = "order"
    exit_status = 2


class InsufficientDataError(PsicalError, ValueError):
    code = "insufficient-data"


class OffGridError(PsicalError, ValueError):
    code = "off-grid"
    exit_status = 2


class MemoryGuardError(PsicalError, MemoryError):
    code = "memory-guard"


class InputError(PsicalError, ValueError):
    code = "input"
    exit_status = 2


class FormatError(PsicalError, ValueError):
    code = "format"
    exit_status = 2
