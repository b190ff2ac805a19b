"""Exception types shared across the package."""


class L2FError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(L2FError, ValueError):
    """A parameter or configuration violates a precondition."""


class DomainError(L2FError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(L2FError, ValueError):
    """Array arguments have incompatible lengths."""


class SupportError(L2FError, ValueError):
    """Measure nodes fall outside the admissible window."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class NumericError(L2FError, ArithmeticError):
    """A numerical routine failed (root polish, Cholesky, ...)."""

    def __init__(self, message, index=None, cond_estimate=None):
        super().__init__(message)
        self.index = index
        self.cond_estimate = cond_estimate


class NoPeakError(L2FError):
    """The filtered spectrum carries no peak (identically zero)."""


class EstimationFailure(L2FError):
    """The rate estimator produced no usable peak at any shift."""
