"""Exception types shared across the package."""


class ConcurrenceLabError(ValueError):
    """Base class for data and precondition failures."""


class DimensionError(ConcurrenceLabError):
    """Site dimensions, labels or matrices do not fit together."""


class PreconditionError(ConcurrenceLabError):
    """An argument violates a documented precondition."""


class RealnessError(ConcurrenceLabError):
    """A quadratic-form coefficient kept an imaginary part above tolerance."""
