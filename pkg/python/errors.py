"""
Exception hierarchy for the NDOPPE toolkit.
Every error raised on purpose by the package derives from NdoppeError so the
CLI can report it on stderr and pick an exit status.
"""

from typing import Optional


class NdoppeError(Exception):
    """Base class for all package errors."""


class ParameterError(NdoppeError, ValueError):
    """A constructor argument violates its constraint."""


class DomainError(NdoppeError, ValueError):
    """A function argument lies outside the function's domain."""


class SeriesOverflowError(NdoppeError, OverflowError):
    """The value does not fit in a float; use the log-scaled companion."""


class ConvergenceError(NdoppeError, ArithmeticError):
    """A series or continued fraction ran out of terms."""


class DegenerateError(NdoppeError, ArithmeticError):
    """The computation collapses (zero survival, all-zero data, ...)."""


class NoRootError(NdoppeError, ValueError):
    """The estimating equation has no root inside the parameter space."""


class UnsupportedOperationError(NdoppeError, NotImplementedError):
    """The requested quantity is not available for this model."""


class DatasetError(NdoppeError, ValueError):
    """Base class for count dataset problems."""


class DatasetParseError(DatasetError):
    """A dataset file line could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NegativeFrequencyError(DatasetError):
    pass


class DuplicateCountError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass
