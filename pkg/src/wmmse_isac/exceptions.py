"""Exception hierarchy."""


class WMMSEISACError(Exception):
    """Base class for all package errors."""


class ConfigError(WMMSEISACError, ValueError):
    """A configuration value is missing, malformed or out of range."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConditioningError(WMMSEISACError, ArithmeticError):
    """A matrix that must be positive definite is numerically singular."""


class SolverError(WMMSEISACError, RuntimeError):
    """The alternating solver could not complete an update."""


class AggregationError(WMMSEISACError):
    """No usable trial results exist for a sweep point."""
