"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
numerical failures exit 3.
"""


class ConfigurationError(ValueError):
    """A config value or combination of values is invalid."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class DegenerateObjectiveError(NumericalError):
    """An optimisation objective is flat to within noise; no optimum exists."""


class InsufficientDataError(ValueError):
    """A series is too short for the requested operation."""
