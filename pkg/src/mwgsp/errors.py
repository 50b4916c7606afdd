"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 2, bad data exits 3
and numerical trouble exits 4.
"""


class MWGSPError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MWGSPError, ValueError):
    """An argument violates an operation's precondition."""


class DataError(MWGSPError):
    """An input file or in-memory object is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CapacityError(MWGSPError):
    """An explicit product would exceed the materialization cap."""


class NumericalFailure(MWGSPError, ArithmeticError):
    """An iterative method failed or a filter produced non-finite values.

    ``residual`` and ``iterations`` are filled in when known.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
