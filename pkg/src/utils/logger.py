"""
Logging configuration for the Rotating Wave Toolkit.
"""

import logging
import logging.handlers
import os
from datetime import datetime
from pathlib import Path

import colorlog

# Global logger instance
_logger = None

LOG_DIR_ENV = "ROTWAVE_LOG_DIR"


def _setup_logger():
    """Set up the logger with file and console handlers."""
    global _logger

    if _logger is not None:
        return _logger

    # Create logs directory
    logs_dir = Path(os.environ.get(LOG_DIR_ENV, "logs"))
    logs_dir.mkdir(parents=True, exist_ok=True)

    # Create logger
    _logger = logging.getLogger("RotatingWaveToolkit")
    _logger.setLevel(logging.DEBUG)
    _logger.propagate = False

    # Prevent duplicate handlers
    if _logger.handlers:
        return _logger

    file_formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
    console_formatter = colorlog.ColoredFormatter(
        '%(log_color)s%(asctime)s - %(levelname)s%(reset)s - %(message)s',
        log_colors={
            'DEBUG': 'cyan',
            'INFO': 'green',
            'WARNING': 'yellow',
            'ERROR': 'red',
            'CRITICAL': 'bold_red',
        },
    )

    # File handler with rotation
    log_filename = logs_dir / f"rotwave_{datetime.now().strftime('%Y%m%d')}.log"
    file_handler = logging.handlers.RotatingFileHandler(
        log_filename,
        maxBytes=10*1024*1024,  # 10MB
        backupCount=5
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(file_formatter)

    # Console handler; stdout carries command output
    console_handler = colorlog.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)

    _logger.addHandler(file_handler)
    _logger.addHandler(console_handler)

    return _logger


def get_logger():
    """Get the application logger."""
    return _setup_logger()


def set_console_level(level: int):
    """Change the console verbosity (used by the CLI --verbose/--quiet flags)."""
    for handler in get_logger().handlers:
        if not isinstance(handler, logging.handlers.RotatingFileHandler):
            handler.setLevel(level)
