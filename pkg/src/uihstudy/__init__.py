"""Event-study toolkit: market-model abnormal returns, CAR tests,
uncertain-information hypothesis verdicts, robust cross-sectional
regressions, and a deterministic synthetic-market oracle."""

from .errors import (
    CalendarError,
    ConfigError,
    DataError,
    EstimationError,
    ScenarioError,
    UihStudyError,
    WindowError,
)
from .event_study import WindowSpec
from .reporting import StudyConfig, StudyReport, run_study

__version__ = "0.1.0"

__all__ = [
    "CalendarError",
    "ConfigError",
    "DataError",
    "EstimationError",
    "ScenarioError",
    "UihStudyError",
    "WindowError",
    "WindowSpec",
    "StudyConfig",
    "StudyReport",
    "run_study",
    "__version__",
]
