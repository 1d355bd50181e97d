"""
Core Services Module
Settings, logging and the exception hierarchy shared by every other package
"""

from .config import settings, Settings
from .logger import logger, context_logger, set_level
from .errors import (
    SubtypeModelError,
    DomainError,
    DataError,
    ConfigurationError,
    ScenarioParseError,
    FitError,
    NonIdentifiedError,
)

__all__ = [
    "settings",
    "Settings",
    "logger",
    "context_logger",
    "set_level",
    "SubtypeModelError",
    "DomainError",
    "DataError",
    "ConfigurationError",
    "ScenarioParseError",
    "FitError",
    "NonIdentifiedError",
]
