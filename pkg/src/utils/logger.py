"""
Logging configuration for the Stackelberg simulator
"""
import logging
import logging.handlers
import os
from datetime import datetime
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(log_level: str = "INFO", log_dir: Optional[str] = "logs") -> logging.Logger:
    """
    Route library logs to stderr and, unless log_dir is None, to a daily rotating file.

    stdout stays reserved for command output (tables and JSON).
    """
    handlers: list = [logging.StreamHandler()]
    log_file = None
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"stackelberg_{datetime.now().strftime('%Y%m%d')}.log")
        handlers.append(logging.handlers.RotatingFileHandler(log_file, maxBytes=10 * 1024 * 1024, backupCount=5))

    logging.basicConfig(level=getattr(logging, log_level.upper(), logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)

    # Worker pools are chatty at INFO
    logging.getLogger('joblib').setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.info(f"Logging configured - Level: {log_level}, File: {log_file or 'none'}")
    return logger
