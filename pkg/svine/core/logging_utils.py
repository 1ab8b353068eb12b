import logging
import os
from typing import Optional

from .config import get_log_dir, get_log_level


def _get_logs_dir() -> str:
    """
    Returns the absolute path to the shared logs directory and ensures it exists.
    Defaults to <cwd>/logs; override with SVINE_LOG_DIR.
    """
    logs_dir = os.path.abspath(get_log_dir())
    os.makedirs(logs_dir, exist_ok=True)
    return logs_dir


def get_logger(name: str, filename: str, level: Optional[int] = None) -> logging.Logger:
    """
    Returns a logger that writes to logs/<filename>, creating the logs directory if needed.
    Each component (rosenblatt, process, inference, commands, tasks) uses its own file.
    """
    logger = logging.getLogger(f"svine.{name}")
    if logger.handlers:
        return logger

    if level is None:
        level = logging.getLevelName(get_log_level())
        if not isinstance(level, int):
            level = logging.INFO
    logger.setLevel(level)

    file_path = os.path.join(_get_logs_dir(), filename)

    fh = logging.FileHandler(file_path, encoding="utf-8")
    fh.setLevel(level)
    fmt = logging.Formatter(
        fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    fh.setFormatter(fmt)

    logger.addHandler(fh)
    logger.propagate = False
    return logger
