"""Exception hierarchy shared by all modules."""


class TargetZoneError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TargetZoneError, ValueError):
    """An argument lies outside the domain of a model (e.g. below the barrier)."""


class IntegrationError(TargetZoneError, ArithmeticError):
    """Forward integration produced a non-finite value or diverged."""

    def __init__(self, message, step=None, path=None):
        super().__init__(message)
        self.step = step
        self.path = path


class EstimationError(TargetZoneError, ArithmeticError):
    """An estimator or fit cannot produce a result from the given data."""


class DataError(TargetZoneError, ValueError):
    """Input data is missing, unparseable or fails validation."""
