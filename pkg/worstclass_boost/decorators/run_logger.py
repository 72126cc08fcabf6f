"""Run logging decorator.

Wraps a command or experiment cell so that it executes under its own
correlation ID and emits a start and a completion (or failure) entry with
timing and a JSON-safe copy of its keyword arguments.

Usage:
    @run_logger
    def train(...): ...

    @run_logger(prefix="cell", log_type="run")
    def run_cell(...): ...
"""

import json
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional

from worstclass_boost.log_system.correlation import CorrelationContext
from worstclass_boost.log_system.unified_logger import UnifiedLogger

_TRACKED = ("method", "seed", "theta")


def _loggable_args(kwargs: Dict[str, Any]) -> Dict[str, Any]:
    loggable = {}
    for key, value in kwargs.items():
        try:
            json.dumps(value)
            loggable[key] = value
        except (TypeError, ValueError):
            loggable[key] = f"<{type(value).__name__}>"
    return loggable


def run_logger(
    func: Optional[Callable[..., Any]] = None,
    *,
    prefix: str = "cmd",
    log_type: str = "command",
) -> Callable[..., Any]:
    """Log start, completion and failure of ``func`` under a fresh correlation ID.

    Keyword arguments named ``method``, ``seed`` or ``theta`` are also copied
    into the matching log columns so runs can be filtered on them.
    """

    def decorator(f: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(f)
        def wrapper(*args, **kwargs) -> Any:
            with CorrelationContext(prefix=prefix):
                logger = UnifiedLogger.get_logger(f"{log_type}.{f.__name__}")
                input_args = _loggable_args(kwargs)
                columns = {k: kwargs[k] for k in _TRACKED if isinstance(kwargs.get(k), (int, float, str))}
                logger.info(
                    f"Starting {f.__name__}",
                    log_type=log_type,
                    command=f.__name__,
                    status="running",
                    input_args=input_args,
                    **columns,
                )
                start = time.perf_counter()
                try:
                    result = f(*args, **kwargs)
                except Exception as e:
                    logger.error(
                        f"{f.__name__} failed",
                        log_type=log_type,
                        command=f.__name__,
                        duration_ms=(time.perf_counter() - start) * 1000,
                        status="error",
                        error_message=str(e),
                        **columns,
                    )
                    raise
                logger.info(
                    f"{f.__name__} completed",
                    log_type=log_type,
                    command=f.__name__,
                    duration_ms=(time.perf_counter() - start) * 1000,
                    status="success",
                    **columns,
                )
                return result

        return wrapper

    if func is not None:
        return decorator(func)
    return decorator
