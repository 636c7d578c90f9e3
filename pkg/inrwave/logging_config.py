"""
Logging setup for the CLI and scripts. Library modules only create
module-level loggers; they never configure handlers or print.
"""
from __future__ import annotations

import logging
import os

LOG_LEVEL_ENV = "INRWAVE_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str | None = None) -> None:
    """Install one stream handler on the package logger. Idempotent."""
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    root = logging.getLogger("inrwave")
    root.setLevel(numeric)
    if not any(getattr(h, "_inrwave", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._inrwave = True  # type: ignore[attr-defined]
        root.addHandler(handler)
