"""Exception hierarchy shared by every module of the package."""


class FracLatticeError(Exception):
    """Base class for all package errors."""


class DomainError(FracLatticeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParameterError(FracLatticeError, ValueError):
    """A parameter combination is not supported (e.g. a pole of a Gamma factor)."""


class ConfigError(FracLatticeError, ValueError):
    """An operator or run configuration is inconsistent."""


class ConvergenceError(FracLatticeError, RuntimeError):
    """A series, recurrence or study failed to meet its accuracy target."""


class DivergenceError(ConvergenceError):
    """A series is divergent for the requested parameters."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best estimate and its error bound are kept so callers can decide
    whether the achieved accuracy is usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class TruncationError(ConvergenceError):
    """A kernel sum was truncated too early for the requested tolerance."""
