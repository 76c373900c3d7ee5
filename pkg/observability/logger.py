"""
Structured logging for petzlab runs.

Records go to stderr so that stdout stays reserved for command output (tables,
JSON reports). Every record carries the active campaign id and operation when
set. Float fields keep their full repr: gaps near the verdict tolerances are
only meaningful to the last digit.
"""

import json
import logging
import sys
import uuid
from contextvars import ContextVar
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from .config import get_config

_campaign_id: ContextVar[Optional[str]] = ContextVar("campaign_id", default=None)
_operation_context: ContextVar[Optional[str]] = ContextVar("operation_context", default=None)

# Marks handlers installed by init_logging so a re-init replaces only those
_HANDLER_FLAG = "_petzlab_handler"


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return str(value)


def _context() -> dict[str, str]:
    context = {}
    if _campaign_id.get():
        context["campaign_id"] = _campaign_id.get()
    if _operation_context.get():
        context["operation"] = _operation_context.get()
    return context


class StructuredFormatter(logging.Formatter):
    """One JSON object per record; non-finite floats become strings."""

    def format(self, record: logging.LogRecord) -> str:
        config = get_config()
        data = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "service": config.service_name,
            "environment": config.environment,
            **_context(),
        }
        for key, value in getattr(record, "extra_fields", {}).items():
            data[key] = _jsonable(value)
        if record.exc_info:
            data["exception"] = self.formatException(record.exc_info)
        return json.dumps(data)


class TextFormatter(logging.Formatter):
    """``HH:MM:SS LEVEL message [campaign op] | key=value ...``, coloured on a terminal."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, color: bool = False):
        super().__init__()
        self.color = color

    def format(self, record: logging.LogRecord) -> str:
        level = f"{record.levelname:8s}"
        if self.color and record.levelname in self.COLORS:
            level = f"{self.COLORS[record.levelname]}{level}{self.RESET}"
        stamp = datetime.fromtimestamp(record.created).strftime("%H:%M:%S")
        line = f"{stamp} {level} {record.getMessage()}"

        context = _context()
        if context:
            line += " [" + " ".join(context.values()) + "]"
        fields = getattr(record, "extra_fields", None)
        if fields:
            line += " | " + " ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in fields.items())
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class StructuredLogger:
    """``logger.info("Message", key=value, ...)``; fields whose value is None are dropped."""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)
        self.name = name

    def _log(self, level: int, message: str, exc_info: bool = False, **fields: Any) -> None:
        if not self.logger.isEnabledFor(level):
            return
        extra_fields = {k: v for k, v in fields.items() if v is not None}
        extra = {"extra_fields": extra_fields} if extra_fields else {}
        self.logger.log(level, message, exc_info=exc_info, extra=extra)

    def debug(self, message: str, **fields: Any) -> None:
        self._log(logging.DEBUG, message, **fields)

    def info(self, message: str, **fields: Any) -> None:
        self._log(logging.INFO, message, **fields)

    def warning(self, message: str, **fields: Any) -> None:
        self._log(logging.WARNING, message, **fields)

    def error(self, message: str, **fields: Any) -> None:
        self._log(logging.ERROR, message, **fields)

    def exception(self, message: str, **fields: Any) -> None:
        self._log(logging.ERROR, message, exc_info=True, **fields)


def init_logging() -> None:
    """Install the stderr handler (and the JSON file handler when configured) on the root logger."""
    config = get_config()
    root = logging.getLogger()
    root.setLevel(getattr(logging, config.log_level.upper()))
    for handler in [h for h in root.handlers if getattr(h, _HANDLER_FLAG, False)]:
        root.removeHandler(handler)

    console = logging.StreamHandler(sys.stderr)
    if config.log_format == "json":
        console.setFormatter(StructuredFormatter())
    else:
        console.setFormatter(TextFormatter(color=sys.stderr.isatty()))
    handlers = [console]

    if config.log_file:
        Path(config.log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(config.log_file)
        file_handler.setFormatter(StructuredFormatter())
        handlers.append(file_handler)

    for handler in handlers:
        setattr(handler, _HANDLER_FLAG, True)
        root.addHandler(handler)

    get_logger(__name__).debug("Logging initialized", log_level=config.log_level, log_format=config.log_format)


def get_logger(name: str) -> StructuredLogger:
    return StructuredLogger(name)


def set_campaign_id(campaign_id: Optional[str] = None) -> str:
    """Set the campaign id attached to every record. Generates one if not provided."""
    if campaign_id is None:
        campaign_id = str(uuid.uuid4())
    _campaign_id.set(campaign_id)
    return campaign_id


def get_campaign_id() -> Optional[str]:
    return _campaign_id.get()


class LogContext:
    """Scope a campaign id and operation; the previous values come back on exit."""

    def __init__(self, operation: Optional[str] = None, campaign_id: Optional[str] = None):
        self.operation = operation
        self.campaign_id = campaign_id
        self._tokens = []

    def __enter__(self):
        if self.operation:
            self._tokens.append((_operation_context, _operation_context.set(self.operation)))
        if self.campaign_id:
            self._tokens.append((_campaign_id, _campaign_id.set(self.campaign_id)))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        for var, token in reversed(self._tokens):
            var.reset(token)
        self._tokens.clear()
