"""
Structured Logging

structlog wired on top of the stdlib dictConfig produced by
Settings.get_log_config(), so harness events and third-party library logs
(httpx, celery) share one renderer.

Usage:
    from app.core.logging import get_logger

    logger = get_logger(__name__)
    logger.info("sequence_finished", sequence="car_01", seconds=3.2)
"""

import logging.config
from typing import Optional

import structlog

from app.config import settings

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """Configure stdlib logging and structlog once per process."""
    global _configured

    config = settings.get_log_config()
    if level:
        config["root"]["level"] = level.upper()
    logging.config.dictConfig(config)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Return a bound structlog logger; configures logging lazily."""
    if not _configured:
        configure_logging()
    return structlog.get_logger(name)
