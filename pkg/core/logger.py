import logging
import os
import re
from datetime import date, datetime, timedelta
from typing import Optional

from .config import LoggingConfig, settings


class RunLogHandler(logging.FileHandler):
    """
    File handler writing one log per calendar day as <file_prefix>_YYYY-MM-DD.log

    The file is switched on the first record of a new day; files of this prefix
    older than retention_days are pruned at open and at every switch.
    """

    def __init__(self, config: LoggingConfig, today: Optional[date] = None):
        self.config = config
        self.day = today or date.today()
        self._pattern = re.compile(rf"^{re.escape(config.file_prefix)}_(\d{{4}}-\d{{2}}-\d{{2}})\.log$")

        os.makedirs(config.log_directory, exist_ok=True)
        super().__init__(self.path_for(self.day), delay=True)
        self.prune()

    def path_for(self, day: date) -> str:
        return os.path.join(self.config.log_directory, f"{self.config.file_prefix}_{day.isoformat()}.log")

    def emit(self, record: logging.LogRecord) -> None:
        day = datetime.fromtimestamp(record.created).date()
        if day != self.day:
            self.switch_to(day)
        super().emit(record)

    def switch_to(self, day: date) -> None:
        """Close the current file and continue in the one for `day`"""
        self.acquire()
        try:
            if self.stream:
                self.stream.close()
                self.stream = None
            self.day = day
            self.baseFilename = os.path.abspath(self.path_for(day))
        finally:
            self.release()
        self.prune()

    def prune(self) -> None:
        """Delete this project's logs dated before day - retention_days"""
        cutoff = self.day - timedelta(days=self.config.retention_days)
        for name in os.listdir(self.config.log_directory):
            match = self._pattern.match(name)
            if not match:
                continue
            try:
                if date.fromisoformat(match.group(1)) < cutoff:
                    os.remove(os.path.join(self.config.log_directory, name))
            except (ValueError, OSError):
                continue


def setup_logger(name: str = __name__) -> logging.Logger:
    """Set up logger with console and file handlers"""
    logger = logging.getLogger(name)
    level = getattr(logging, settings.logging.level)
    logger.setLevel(level)
    logger.propagate = False

    logger.handlers.clear()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if settings.logging.file_logging:
        try:
            file_handler = RunLogHandler(settings.logging)
        except OSError as e:
            # Read-only working directory: console logging only
            logger.warning(f"File logging disabled: {e}")
        else:
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

    return logger


def set_level(level: str) -> None:
    """Change the level of the package logger and all of its handlers"""
    numeric = getattr(logging, level.upper())
    logger.setLevel(numeric)
    for handler in logger.handlers:
        handler.setLevel(numeric)


# Create default logger
logger = setup_logger("subtype_ph")


class ContextLogger:
    """Logger that appends key=value context (scenario, estimator, replication) to messages"""

    def __init__(self, base_logger=None):
        self.base_logger = base_logger or logger
        self.run_context = {}

    def set_context(self, **kwargs):
        """Set context variables for subsequent log messages"""
        self.run_context.update(kwargs)

    def clear_context(self):
        """Clear all context variables"""
        self.run_context.clear()

    def _format_message(self, message, extra_context=None):
        """Format message with context"""
        context = self.run_context.copy()
        if extra_context:
            context.update(extra_context)

        if context:
            context_str = " | ".join([f"{k}={v}" for k, v in context.items()])
            return f"{message} | Context: {context_str}"
        return message

    def debug(self, message, **extra_context):
        if self.base_logger.isEnabledFor(logging.DEBUG):
            self.base_logger.debug(self._format_message(message, extra_context))

    def info(self, message, **extra_context):
        self.base_logger.info(self._format_message(message, extra_context))

    def warning(self, message, **extra_context):
        self.base_logger.warning(self._format_message(message, extra_context))

    def error(self, message, **extra_context):
        self.base_logger.error(self._format_message(message, extra_context))

    def critical(self, message, **extra_context):
        self.base_logger.critical(self._format_message(message, extra_context))

    def log_fit(self, estimator, converged, iterations, gradient_norm=None, duration=None, detail=None, **kwargs):
        """Log the outcome of one estimator fit with standardized format"""
        context = {
            'estimator': estimator,
            'iterations': iterations,
            'gradient_norm': f"{gradient_norm:.3e}" if gradient_norm is not None else None,
            'duration_ms': round(duration, 1) if duration is not None else None,
            'detail': detail,
            **kwargs
        }

        if converged:
            self.info(f"Fit converged: {estimator}", **context)
        else:
            self.warning(f"Fit did not converge: {estimator}", **context)

    def log_replication(self, replication, failures, duration=None, **kwargs):
        """Log completion of one simulation replication"""
        context = {
            'replication': replication,
            'failed_estimators': ",".join(failures) if failures else "none",
            'duration_ms': round(duration, 1) if duration is not None else None,
            **kwargs
        }

        level = 'warning' if failures else 'debug'
        getattr(self, level)(f"Replication finished: {replication}", **context)

    def log_performance(self, operation, duration, **kwargs):
        """Log performance metrics"""
        context = {
            'operation': operation,
            'duration_ms': round(duration, 1),
            **kwargs
        }

        level = 'warning' if duration > 60000 else 'info'  # Warn if over a minute
        getattr(self, level)(f"Performance: {operation}", **context)


# Create enhanced logger instance
context_logger = ContextLogger(logger)
