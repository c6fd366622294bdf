"""Exception types shared across the package."""


class HasQoEError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(HasQoEError):
    """Malformed input, bad arguments, or an unusable file."""


class ValidationError(HasQoEError):
    """Domain data violates a model invariant (e.g. MOS out of range)."""


class DegenerateMetricError(HasQoEError):
    """A metric or regression is mathematically undefined for the input."""
