"""
Settings
config.json sections (logging, fitting, simulation) with SUBTYPE_PH_* environment overrides
"""

import json
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()


PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class EnvironmentOverrides(BaseSettings):
    """Settings that may be overridden from the environment (SUBTYPE_PH_*)"""
    model_config = SettingsConfigDict(env_prefix='SUBTYPE_PH_', extra='ignore')

    config: str = os.path.join(PROJECT_ROOT, "config.json")
    log_level: Optional[str] = None
    log_directory: Optional[str] = None
    workers: Optional[int] = None


class LoggingConfig(BaseModel):
    level: str = "INFO"
    retention_days: int = Field(default=30, ge=1, le=365)
    log_directory: str = "logs"
    file_prefix: str = Field(default="subtype_ph", pattern=r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")
    file_logging: bool = True

    @field_validator('level')
    @classmethod
    def validate_level(cls, v):
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown logging level: {v}")
        return level


class FittingConfig(BaseModel):
    max_iterations: int = Field(default=100, ge=1)
    gradient_tolerance: float = Field(default=1e-8, gt=0)
    step_halving_max: int = Field(default=30, ge=0)
    ridge_on_singular: float = Field(default=1e-8, ge=0)
    beta_guard: float = Field(default=50.0, gt=0, description="Abort when any |beta| exceeds this (monotone likelihood)")


class SimulationConfig(BaseModel):
    workers: Optional[int] = Field(default=None, ge=1, description="None means available parallelism")
    progress_bar: bool = False
    failure_warning_fraction: float = Field(default=0.2, ge=0, le=1)
    confidence_level: float = Field(default=0.95, gt=0, lt=1)


class Settings(BaseModel):
    logging: LoggingConfig = LoggingConfig()
    fitting: FittingConfig = FittingConfig()
    simulation: SimulationConfig = SimulationConfig()

    @classmethod
    def load_from_file(cls, config_path: str = "config.json") -> "Settings":
        """Load configuration from JSON file, then apply environment overrides"""
        if not os.path.exists(config_path):
            raise FileNotFoundError(
                f"Configuration file '{config_path}' not found. "
                "Please create it with logging, fitting and simulation sections"
            )

        with open(config_path, 'r') as f:
            config_data = json.load(f)

        return cls(**config_data).with_overrides(EnvironmentOverrides())

    def with_overrides(self, overrides: EnvironmentOverrides) -> "Settings":
        """Return a copy with SUBTYPE_PH_* environment values applied"""
        updated = self.model_copy(deep=True)
        if overrides.log_level:
            updated.logging.level = overrides.log_level.upper()
        if overrides.log_directory:
            updated.logging.log_directory = overrides.log_directory
        if overrides.workers:
            updated.simulation.workers = overrides.workers
        return updated


# Load settings
_environment = EnvironmentOverrides()
try:
    settings = Settings.load_from_file(_environment.config)
except FileNotFoundError:
    print(f"Warning: {_environment.config} not found. Using default configuration.")
    settings = Settings().with_overrides(_environment)
