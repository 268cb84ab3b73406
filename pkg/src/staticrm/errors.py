"""Exception hierarchy.

The CLI maps ``ValidationError`` to exit code 2 and ``NumericalError`` to 3.
"""


class ValidationError(ValueError):
    """Malformed input: an instance, family, distribution or policy request."""


class StateSpaceTooLarge(ValidationError):
    """Exact evaluation or the DP would exceed the configured state cap."""


class AssumptionViolation(ValidationError):
    """A policy precondition (e.g. CDF ordering for the high-to-low calendar) fails."""


class ZeroMeanDemand(ValidationError):
    """Truncation ratio requested for a demand distribution with zero mean."""


class NumericalError(RuntimeError):
    """The LP solver stalled or returned an inconsistent basis."""
