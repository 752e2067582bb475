"""
Logging setup shared by the CLI and the demo script
"""
import logging
from typing import Optional
from src.config import Config

_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    """
    Install a single stderr handler on the root logger

    Args:
        level: Level name; defaults to Config.LOG_LEVEL, or DEBUG when Config.DEBUG is set
    """
    if level is None:
        level = 'DEBUG' if Config.DEBUG else Config.LOG_LEVEL
    root = logging.getLogger()
    if not any(getattr(h, '_delassus', False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._delassus = True
        root.addHandler(handler)
    root.setLevel(level)
