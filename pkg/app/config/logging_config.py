# app/config/logging_config.py
import logging
import sys
from typing import Optional

from app.config.mermin_config import LOG_CONFIG

_NOISY_LOGGERS = ["sqlalchemy.engine", "sqlalchemy.pool", "uvicorn.access", "httpx"]


def configure_logging(level: Optional[str] = None) -> None:
    """Route all log records to stderr so table output on stdout stays clean."""
    resolved = (level or LOG_CONFIG["level"]).upper()
    logging.basicConfig(
        level=getattr(logging, resolved, logging.WARNING),
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )
    for logger_name in _NOISY_LOGGERS:
        logging.getLogger(logger_name).setLevel(logging.WARNING)
