"""Unified logging system: correlation IDs, Loguru sinks and run-log destinations."""

from .correlation import (
    CorrelationContext,
    clear_correlation_id,
    generate_correlation_id,
    get_correlation_id,
    set_correlation_id,
)
from .unified_logger import InterceptHandler, UnifiedLogger

__all__ = [
    "UnifiedLogger",
    "InterceptHandler",
    "CorrelationContext",
    "generate_correlation_id",
    "get_correlation_id",
    "set_correlation_id",
    "clear_correlation_id",
]
