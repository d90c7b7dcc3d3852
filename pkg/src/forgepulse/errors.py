"""Exception types shared across the toolkit."""


class ForgepulseError(Exception):
    """Base class for all toolkit errors."""


class LogParseError(ForgepulseError):
    """A malformed commit-log line encountered in strict mode."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class RepoAcquisitionError(ForgepulseError):
    """git could not be invoked on, or failed for, the given path."""


class IdentityError(ForgepulseError):
    """An email address that cannot serve as a contributor identity."""


class SeriesError(ForgepulseError):
    """Invalid input to monthly-series construction or smoothing."""


class MetricError(ForgepulseError):
    """A statistic's domain preconditions are violated."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class GrowthFitError(ForgepulseError):
    """Growth-curve fitting or phase classification cannot proceed."""


class ConfigError(ForgepulseError):
    """Bad run or identity configuration."""
