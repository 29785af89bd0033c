from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler

from pythonjsonlogger import jsonlogger

LOG_DIR = os.getenv("FPULYAP_LOG_DIR", os.path.join(os.getcwd(), "logs"))
LOG_FILE = os.path.join(LOG_DIR, "fpulyap.log")


def _ensure_log_dir() -> bool:
    try:
        os.makedirs(LOG_DIR, exist_ok=True)
    except OSError:
        return False
    return True


class JsonFormatter(jsonlogger.JsonFormatter):
    """JSON lines; anything passed via extra={"event": ..., "eps": ...} lands in the payload."""

    def add_fields(self, log_record, record, message_dict):  # type: ignore[override]
        super().add_fields(log_record, record, message_dict)
        log_record["level"] = record.levelname
        log_record["logger"] = record.name


_def_level = os.getenv("FPULYAP_LOG_LEVEL", os.getenv("LOG_LEVEL", "INFO")).upper()


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger
    logger.setLevel(_def_level)
    logger.propagate = False

    formatter = JsonFormatter("%(message)s", json_default=str)

    # File handler
    if _ensure_log_dir():
        fh = RotatingFileHandler(LOG_FILE, maxBytes=2_000_000, backupCount=2)
        fh.setLevel(_def_level)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    # Console handler
    ch = logging.StreamHandler()
    ch.setLevel(_def_level)
    ch.setFormatter(formatter)
    logger.addHandler(ch)

    return logger
