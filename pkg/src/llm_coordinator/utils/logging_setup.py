"""Process-wide logging configuration driven by LoggingConfig."""

import logging
import sys
from typing import Optional

from ..config import LoggingConfig

ROOT_LOGGER = "llm_coordinator"
HANDLER_MARK = "_llm_coordinator_handler"


def configure_logging(config: LoggingConfig, level: Optional[str] = None) -> logging.Logger:
    """Install the console and file handlers once per process.

    The console handler writes to standard error; standard output belongs to
    command results. Calling again replaces the handlers installed by a
    previous call, so the CLI and tests can reconfigure freely. Both package
    loggers (``llm_coordinator`` and ``processing``) share the handlers.
    """
    level_name = (level or config.level).upper()
    numeric_level = logging.getLevelName(level_name)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level_name}")

    formatter = logging.Formatter(config.format)
    handlers = []

    if config.console:
        handlers.append(logging.StreamHandler(sys.stderr))

    if config.file_path:
        handlers.append(logging.FileHandler(config.file_path, encoding="utf-8"))

    for handler in handlers:
        handler.setLevel(numeric_level)
        handler.setFormatter(formatter)
        setattr(handler, HANDLER_MARK, True)

    for name in (ROOT_LOGGER, "processing"):
        package_logger = logging.getLogger(name)
        for old in [h for h in package_logger.handlers if getattr(h, HANDLER_MARK, False)]:
            package_logger.removeHandler(old)
            old.close()
        for handler in handlers:
            package_logger.addHandler(handler)
        package_logger.setLevel(numeric_level)

    return logging.getLogger(ROOT_LOGGER)
