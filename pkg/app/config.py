"""
Application Configuration

This module defines all configuration settings for the VPTrack harness.
Settings are loaded from environment variables (.env file or system environment).

Usage:
    from app.config import settings

    base_url = settings.LOCALIZER_BASE_URL
    in_flight = settings.LOCALIZER_MAX_IN_FLIGHT
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    All settings can be overridden by setting environment variables.
    For example: export LOCALIZER_BASE_URL=http://gpu-box:8000/v1
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,  # Allow lowercase env vars
        extra="ignore"  # Ignore unknown env vars
    )

    # ===== Application Settings =====
    APP_VERSION: str = "1.0.0"

    # ===== Localizer Endpoint (chat-completions style) =====
    LOCALIZER_BASE_URL: str = "http://localhost:8000/v1"
    LOCALIZER_MODEL: str = "Qwen/Qwen3-VL-4B-Instruct"
    LOCALIZER_API_KEY: Optional[str] = None
    LOCALIZER_TIMEOUT: float = 120.0  # seconds per attempt
    LOCALIZER_MAX_ATTEMPTS: int = 3
    LOCALIZER_BACKOFF_SECONDS: float = 0.5  # doubles after every failed attempt
    LOCALIZER_MAX_IN_FLIGHT: int = 4
    LOCALIZER_TEMPERATURE: Optional[float] = 0.0  # None omits the field

    # ===== Visual Prompt =====
    PROMPT_COLOR: str = "255,0,0"
    PROMPT_THICKNESS: str = "auto"  # "auto" or a pixel count
    PROMPT_ENLARGE_FACTOR: float = 2.0

    # Local-crop baseline: scale applied to the previous box before cropping
    SEARCH_FACTOR: float = 2.0

    # ===== Celery Task Queue =====
    CELERY_BROKER_URL: str = "redis://localhost:6379/0"
    CELERY_RESULT_BACKEND: str = "redis://localhost:6379/1"
    CELERY_TASK_TRACK_STARTED: bool = True
    CELERY_TASK_TIME_LIMIT: int = 6 * 3600  # long-term sequences run for hours

    # ===== Logging =====
    LOG_LEVEL: str = "INFO"  # DEBUG, INFO, WARNING, ERROR
    LOG_FORMAT: str = "json"  # json or text

    def get_log_config(self) -> dict:
        """Get logging configuration based on settings"""
        import structlog

        pre_chain = [
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
        ]
        return {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "text": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.dev.ConsoleRenderer(colors=False),
                    "foreign_pre_chain": pre_chain,
                },
                "json": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.processors.JSONRenderer(),
                    "foreign_pre_chain": pre_chain,
                },
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "formatter": self.LOG_FORMAT if self.LOG_FORMAT in ("json", "text") else "json",
                    "stream": "ext://sys.stderr",
                },
            },
            "root": {
                "level": self.LOG_LEVEL,
                "handlers": ["console"],
            },
        }


# ===== Global Settings Instance =====
# This is imported throughout the application
settings = Settings()


# ===== Helper Functions =====
def parse_color(value: str) -> tuple[int, int, int]:
    """
    Parse an "R,G,B" string into an RGB triple.

    Raises:
        ValueError: If the string is not three integers in 0..255
    """
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise ValueError(f"color must be 'R,G,B', got {value!r}")
    rgb = tuple(int(p) for p in parts)
    if any(c < 0 or c > 255 for c in rgb):
        raise ValueError(f"color channels must be in 0..255, got {value!r}")
    return rgb  # type: ignore[return-value]
