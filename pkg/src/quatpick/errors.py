"""Exception types shared across the package."""


class QuatPickError(Exception):
    """Base class for all package errors."""


class DomainError(QuatPickError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """A kernel/series parameter lies outside the region of convergence."""


class NonInvertibleError(DomainError):
    """Star inverse requested for a series with (numerically) vanishing constant term."""


class PoleError(DomainError):
    """Pointwise evaluation hit a zero of a star denominator."""


class SingularMatrixError(QuatPickError):
    """Matrix is singular to working precision.

    Carries the index of the offending pivot.
    """

    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"singular to working precision at pivot {pivot_index}")


class PreconditionError(QuatPickError):
    """A documented operation precondition does not hold."""


class DegenerateDataError(QuatPickError):
    """Interpolation data degenerate for the requested construction."""


class InvalidParameterError(QuatPickError):
    """Free parameter rejected (fails the contractivity test)."""


class ConvergenceError(QuatPickError):
    """An iterative routine did not converge within its sweep budget."""
