import enum
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class LogLevel(str, enum.Enum):
    """Levels loguru knows by name."""

    TRACE = "TRACE"
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class Settings(BaseSettings):
    """
    Application settings.

    These parameters can be configured
    with environment variables. They only provide defaults:
    every run resolves them into a RunConfig, and the emitted
    config is what makes a run reproducible.
    """

    # Current environment
    environment: str = "dev"

    log_level: LogLevel = LogLevel.INFO

    # Size of the worker pool. None means all available cores.
    jobs: Optional[int] = None

    # Gauss-Legendre node count (per panel for graded rules).
    quad_order: int = 64
    # Number of geometric panels toward u = 1 in graded rules.
    quad_levels: int = 12

    tol: float = 1e-10
    damping: float = 0.5
    max_iter: int = 10_000
    scan_points: int = 2000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="NEMATIC_MF_",
        env_file_encoding="utf-8",
    )


settings = Settings()
