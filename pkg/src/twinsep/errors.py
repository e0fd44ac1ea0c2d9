class TwinsepError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TwinsepError, ValueError):
    pass


class CensusError(TwinsepError):
    """Fatal census failure; carries the last fully completed segment boundary."""

    def __init__(self, message, last_boundary=None):
        super().__init__(message)
        self.last_boundary = last_boundary


class CheckpointError(TwinsepError):
    pass


class FitInsufficientError(TwinsepError):
    """Too few qualifying histogram bins to fit a slope."""


class DegenerateFitError(TwinsepError):
    """The fitted decay parameter is not positive."""


class EmptyHistogramError(TwinsepError):
    pass


class DomainError(TwinsepError, ValueError):
    """Model function evaluated outside its domain."""


class OutOfModelRangeError(DomainError):
    pass


class NoSolutionError(TwinsepError):
    pass


class ThresholdClampWarning(UserWarning):
    """The requested risk factor leaves less than one expected event; threshold clamped to 0."""
