"""
Exception hierarchy shared by every package.

The CLI maps these onto exit codes (see app.py), so library code raises the
most specific class it can and never calls sys.exit itself.
"""


class MatkError(Exception):
    """Root of all errors raised by this project."""


class ParameterError(MatkError, ValueError):
    """A hyper-parameter or size argument is out of its valid range."""


class DomainError(MatkError, ValueError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class InvalidTargetError(DomainError):
    """Targets are not in {-1, +1} where a binary label is required."""


class ShapeError(MatkError, ValueError):
    """Array dimensions do not agree."""


class DataError(MatkError):
    """A dataset file or array cannot be used."""


class ParseError(DataError):
    """A dataset file could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DegenerateRangeError(DataError):
    """Targets are constant, so they cannot be rescaled."""


class UndefinedMetricError(MatkError, ValueError):
    """A metric is undefined for the given targets (e.g. a single class)."""


class ConvergenceError(MatkError, RuntimeError):
    """An iterative solver ran out of iterations; keeps the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class UsageError(MatkError):
    """Command-line flags that cannot be combined."""
