"""Exception hierarchy shared by all modules."""


class UihStudyError(Exception):
    """Base class for every error raised by this package."""


class DataError(UihStudyError):
    """Malformed or inconsistent input data (bad rows, duplicates, gaps)."""


class CalendarError(UihStudyError):
    """Date outside the trading calendar or an ill-formed calendar."""


class EstimationError(UihStudyError):
    """Regression cannot be computed (rank deficiency, too few observations)."""


class WindowError(UihStudyError):
    """A relative-day window falls outside the available span."""


class ScenarioError(UihStudyError):
    """Invalid synthetic-scenario specification."""


class ConfigError(UihStudyError):
    """Invalid study configuration."""
