"""
Correlation ID management for run tracking.

Every experiment cell and CLI command executes under a correlation ID so that
all log lines it produces (including per-round booster diagnostics) can be
retrieved together. IDs live in a ContextVar, which keeps them isolated between
concurrent cells running in worker threads.
"""

import uuid
from contextvars import ContextVar
from typing import Optional


correlation_id_var: ContextVar[Optional[str]] = ContextVar("correlation_id", default=None)


def generate_correlation_id(prefix: str = "run") -> str:
    """Generate a unique correlation ID such as ``run_1a2b3c4d5e6f``."""
    return f"{prefix}_{uuid.uuid4().hex[:12]}"


def set_correlation_id(correlation_id: Optional[str] = None) -> str:
    """Set the correlation ID for the current context, generating one if needed."""
    if correlation_id is None:
        correlation_id = generate_correlation_id()
    correlation_id_var.set(correlation_id)
    return correlation_id


def get_correlation_id() -> Optional[str]:
    """Get the current correlation ID, or None outside any run or command."""
    return correlation_id_var.get()


def clear_correlation_id() -> None:
    correlation_id_var.set(None)


class CorrelationContext:
    """Context manager scoping a correlation ID to a block.

    Example:
        with CorrelationContext(prefix="cmd") as correlation_id:
            logger.info("sweep started")
    """

    def __init__(self, correlation_id: Optional[str] = None, prefix: str = "run"):
        self.correlation_id = correlation_id
        self.prefix = prefix
        self._previous_id: Optional[str] = None

    def __enter__(self) -> str:
        self._previous_id = correlation_id_var.get()
        return set_correlation_id(self.correlation_id or generate_correlation_id(self.prefix))

    def __exit__(self, exc_type, exc_val, exc_tb):
        # restores the enclosing ID, or clears it at top level
        correlation_id_var.set(self._previous_id)
