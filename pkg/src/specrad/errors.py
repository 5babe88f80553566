"""Exception types shared across the package."""

from __future__ import annotations


class SpecradError(Exception):
    pass


class ConfigurationError(SpecradError, ValueError):
    """Invalid distribution parameters or experiment configuration."""


class UnsupportedError(SpecradError):
    """The request is well formed but not supported for these inputs."""


class NumericalError(SpecradError, ArithmeticError):
    """An iterative or floating-point computation failed.

    ``info`` carries the solver-specific diagnostic (LAPACK ``info`` or the
    number of iterations performed).
    """

    def __init__(self, message: str, info: int | None = None):
        super().__init__(message)
        self.info = info


class CapacityError(SpecradError):
    """An exact enumeration would exceed its configured size limit."""


class BudgetError(SpecradError):
    """A search ran out of budget; ``partial`` is a lower bound, not a result."""

    def __init__(self, message: str, partial: int):
        super().__init__(message)
        self.partial = partial
        self.usable = False


class MatrixFormatError(SpecradError, ValueError):
    """Malformed matrix file. ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
