"""
Unified logging factory with Loguru integration.

Creates correlation-aware loggers that write to a pluggable run-log destination
and, optionally, to a console sink on stderr. Standard-library logging from
third-party packages is intercepted and routed through Loguru as well.
"""

import logging
import sys
from typing import Optional

from loguru import logger

from .correlation import get_correlation_id
from .destinations.base import DestinationConfig, LogDestination, LogEntry
from .destinations.factory import LogDestinationFactory

# Extra keys promoted to LogEntry columns; everything else lands in extra_data.
_ENTRY_FIELDS = (
    "log_type", "command", "duration_ms", "status", "method", "seed", "theta",
    "round", "input_args", "error_message",
)
_CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "{extra[correlation_id]} | {message}"
)


class UnifiedLogger:
    """Factory for creating correlation-aware loggers with pluggable destinations."""

    _destination: Optional[LogDestination] = None
    _initialized: bool = False

    @classmethod
    def initialize(
        cls,
        destination: LogDestination,
        level: str = "DEBUG",
        console_level: Optional[str] = None,
    ) -> None:
        """Initialize the logging system.

        Args:
            destination: Where structured entries are persisted
            level: Minimum level written to the destination
            console_level: Level for the stderr sink; ``None`` disables it
        """
        if cls._initialized:
            cls.close()

        cls._destination = destination
        cls._initialized = True

        logger.remove()
        logger.configure(extra={"correlation_id": "-"})
        logger.add(cls._log_sink, level=level, enqueue=True, serialize=False)
        if console_level:
            logger.add(sys.stderr, level=console_level, format=_CONSOLE_FORMAT)

        logging.basicConfig(handlers=[InterceptHandler()], level=logging.INFO, force=True)
        logging.getLogger("asyncio").setLevel(logging.WARNING)

    @classmethod
    def _log_sink(cls, message) -> None:
        """Loguru sink converting each record to a LogEntry."""
        if not cls._destination:
            return

        record = message.record
        extra = dict(record["extra"])
        correlation_id = extra.get("correlation_id")
        if not correlation_id or correlation_id == "-":
            correlation_id = get_correlation_id() or "init"

        entry = LogEntry(
            correlation_id=correlation_id,
            timestamp=record["time"].replace(tzinfo=None),
            level=record["level"].name,
            log_type=extra.get("log_type", "internal"),
            message=str(record["message"]),
            command=extra.get("command"),
            duration_ms=extra.get("duration_ms"),
            status=extra.get("status"),
            method=extra.get("method"),
            seed=extra.get("seed"),
            theta=extra.get("theta"),
            round=extra.get("round"),
            input_args=extra.get("input_args"),
            error_message=extra.get("error_message"),
            module=record["module"],
            function=record["function"],
            line=record["line"],
            thread_name=record["thread"].name if record["thread"] else None,
            process_id=record["process"].id if record["process"] else None,
            extra_data={
                k: v for k, v in extra.items()
                if k not in _ENTRY_FIELDS and k != "correlation_id"
            },
        )

        try:
            cls._destination.write(entry)
        except Exception as e:
            print(f"Warning: Could not write log entry: {e}", file=sys.stderr)

    @classmethod
    def get_logger(cls, name: Optional[str] = None):
        """Get a Loguru logger bound to the current correlation ID."""
        bindings = {"correlation_id": get_correlation_id() or "-"}
        if name:
            bindings["logger_name"] = name
        return logger.bind(**bindings)

    @classmethod
    def flush(cls) -> None:
        """Block until queued records reach the destination."""
        logger.complete()

    @classmethod
    def get_destination(cls) -> Optional[LogDestination]:
        return cls._destination

    @classmethod
    def close(cls) -> None:
        """Drain the queue, close the destination and remove all sinks."""
        logger.complete()
        logger.remove()
        if cls._destination:
            cls._destination.close()
            cls._destination = None
        cls._initialized = False

    @classmethod
    def initialize_from_config(cls, app_config, console: Optional[bool] = None) -> None:
        """Initialize from an ``AppConfig``'s destination list and levels."""
        raw = (app_config.logging_destinations or {}).get("destinations", [])
        destinations = [DestinationConfig(**d) for d in raw]
        destination = LogDestinationFactory.create_from_config(destinations, app_config)
        use_console = app_config.console_logging if console is None else console
        cls.initialize(
            destination,
            level="DEBUG",
            console_level=app_config.log_level if use_console else None,
        )


class InterceptHandler(logging.Handler):
    """Route standard-library logging records to Loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())
