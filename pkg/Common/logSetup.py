import logging
import os
import sys

LOG_ENV_VAR = "OSP_LOG"
LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s"

_handler = None


def configure_logging(level: str | int | None = None) -> logging.Logger:
    """
    Install a single stderr handler on the root logger.

    :param level: Explicit level; falls back to the OSP_LOG environment variable, then INFO.
    """
    global _handler

    if level is None:
        level = os.environ.get(LOG_ENV_VAR, "INFO")
    if isinstance(level, str):
        level = logging.getLevelName(level.strip().upper())
        if not isinstance(level, int):
            level = logging.INFO

    root = logging.getLogger()
    if _handler is None:
        _handler = logging.StreamHandler(sys.stderr)
        _handler.setFormatter(logging.Formatter(LOG_FORMAT, "%H:%M:%S"))
        root.addHandler(_handler)
    root.setLevel(level)
    return root
