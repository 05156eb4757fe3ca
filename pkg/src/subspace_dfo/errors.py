"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """A dimension argument is out of range (d < 1, p < 1, p > d, size mismatch)."""


class DomainError(ValueError):
    """A scalar argument lies outside a function's domain."""


class UnsupportedSubspaceDimensionError(ValueError):
    """The quadrature path was asked for a subspace dimension above its depth cap.

    Callers should fall back to the Monte Carlo estimator, which handles any
    subspace dimension.
    """


class NonFiniteObjectiveError(RuntimeError):
    """An objective evaluation returned NaN or an infinity."""
