"""Structured JSON logging with a per-run identifier."""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING, Any, Final

if TYPE_CHECKING:  # pragma: no cover - only for type checking
    from ..configuration import TwoStageSettings

ROOT_LOGGER: Final = "twostage"

_RESERVED_RECORD_FIELDS: Final = frozenset(
    vars(logging.LogRecord("", 0, "", 0, "", None, None))
) | {"message", "asctime", "run_id"}

_RUN_ID: ContextVar[str | None] = ContextVar("run_id", default=None)


def set_run_id(run_id: str | None) -> None:
    _RUN_ID.set(run_id)


def get_run_id() -> str | None:
    return _RUN_ID.get()


@contextmanager
def run_context(run_id: str) -> Iterator[None]:
    """Bind ``run_id`` to every record logged inside the block."""

    token = _RUN_ID.set(run_id)
    try:
        yield
    finally:
        _RUN_ID.reset(token)


class RunIdFilter(logging.Filter):
    """Inject the active run identifier into each log record."""

    def filter(self, record: logging.LogRecord) -> bool:  # noqa: D401 - documented by class
        record.run_id = get_run_id() or "n/a"
        return True


class StructuredJsonFormatter(logging.Formatter):
    """Format log records as one JSON object per line."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "run_id": getattr(record, "run_id", "n/a"),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)

        extra = {
            key: value
            for key, value in record.__dict__.items()
            if key not in _RESERVED_RECORD_FIELDS and not key.startswith("_")
        }
        if extra:
            payload["extra"] = extra
        return json.dumps(payload, ensure_ascii=False, default=str)


def _stream_handler() -> logging.StreamHandler:
    # stdout carries command results, logs go to stderr.
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(StructuredJsonFormatter())
    handler.addFilter(RunIdFilter())
    return handler


def _root() -> logging.Logger:
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        root.addHandler(_stream_handler())
        root.setLevel(logging.INFO)
    return root


def get_logger(name: str) -> logging.Logger:
    """Return a logger under the ``twostage`` hierarchy with structured output."""

    _root()
    qualified = name if name.startswith(ROOT_LOGGER) else f"{ROOT_LOGGER}.{name}"
    logger = logging.getLogger(qualified)
    if not any(isinstance(flt, RunIdFilter) for flt in logger.filters):
        logger.addFilter(RunIdFilter())
    return logger


def configure_logging(settings: TwoStageSettings) -> logging.Logger:
    """Apply level and optional rotating file output from settings."""

    root = _root()
    root.setLevel(settings.log_level)
    if settings.log_file is not None:
        target = Path(settings.log_file)
        already = any(
            isinstance(handler, RotatingFileHandler)
            and Path(handler.baseFilename) == target.resolve()
            for handler in root.handlers
        )
        if not already:
            target.parent.mkdir(parents=True, exist_ok=True)
            handler = RotatingFileHandler(
                filename=target,
                maxBytes=settings.log_max_bytes,
                backupCount=settings.log_backup_count,
            )
            handler.setFormatter(StructuredJsonFormatter())
            handler.addFilter(RunIdFilter())
            root.addHandler(handler)
    return root


__all__ = [
    "ROOT_LOGGER",
    "RunIdFilter",
    "StructuredJsonFormatter",
    "configure_logging",
    "get_logger",
    "get_run_id",
    "run_context",
    "set_run_id",
]
