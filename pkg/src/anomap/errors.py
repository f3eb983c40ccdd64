"""Exception types shared across the package.

I/O problems (missing files, unreadable paths) use the built-in OSError
family; everything below is about *content* being wrong.
"""


class AnomapError(Exception):
    """Base class for all anomap-specific errors."""


class ValidationError(AnomapError):
    """Input violates a documented precondition or invariant."""


class FormatError(AnomapError):
    """A byte stream does not conform to the DADF container layout."""


class UndefinedMetricError(AnomapError):
    """Metric is mathematically undefined for the given labels."""
