"""
Error Types
Exception hierarchy shared by the model, likelihood, inference and simulation layers
"""

from typing import Optional


class SubtypeModelError(Exception):
    """Base exception for every failure raised by this package"""

    exit_code = 3

    def __init__(self, message: str, error_code: str = "MODEL_ERROR", details: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        self.details = details
        super().__init__(message)

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} ({self.details})"
        return self.message


class DomainError(SubtypeModelError):
    """Argument outside the domain of a model primitive (t <= 0, k out of range, ...)"""

    exit_code = 2

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "DOMAIN_ERROR", details)


class DataError(SubtypeModelError):
    """Dataset violates a record invariant or lacks a column an estimator needs"""

    exit_code = 2

    def __init__(self, message: str, details: Optional[str] = None, rows: Optional[list] = None):
        self.rows = list(rows or [])
        super().__init__(message, "DATA_ERROR", details)


class ConfigurationError(SubtypeModelError):
    """Invalid scenario, schema or model configuration"""

    exit_code = 2

    def __init__(self, message: str, details: Optional[str] = None, field: Optional[str] = None):
        self.field = field
        super().__init__(message, "CONFIG_ERROR", details)


class ScenarioParseError(ConfigurationError):
    """Key-value file could not be parsed; carries the offending line"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        location = f"line {line}" if line is not None else None
        super().__init__(message, location, field)


class FitError(SubtypeModelError):
    """Estimation cannot start or cannot produce a usable result"""

    exit_code = 3

    def __init__(self, message: str, details: Optional[str] = None, error_code: str = "FIT_ERROR"):
        super().__init__(message, error_code, details)


class NonIdentifiedError(FitError):
    """Information matrix stays singular after the ridge rescue"""

    def __init__(self, message: str = "non-identified model", details: Optional[str] = None):
        super().__init__(message, details, "NON_IDENTIFIED")
