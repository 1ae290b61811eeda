"""Exception types shared across the package."""


class MfracError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MfracError, ValueError):
    pass


class SimulationError(MfracError, RuntimeError):
    pass


class NumericalError(MfracError, RuntimeError):
    """Quadrature or factorization failed to reach its target accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DegenerateError(MfracError, ValueError):
    """An estimator could not produce a value at a given point."""


class ParseError(MfracError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
