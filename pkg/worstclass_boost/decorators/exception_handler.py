"""Exception handling decorator for commands and experiment cells.

Domain errors (``BoostingError`` subclasses) are logged at WARNING with their
code; anything else is an internal error and is logged at ERROR with the full
traceback. Both are re-raised so the caller decides how to surface them.

Usage:
    @exception_handler
    def train(...):
        ...
"""

import traceback
from functools import wraps
from typing import Any, Callable

from worstclass_boost.log_system.unified_logger import UnifiedLogger
from worstclass_boost.models.errors import BoostingError

def exception_handler(func: Callable[..., Any]) -> Callable[..., Any]:
    """Log and re-raise exceptions escaping ``func``."""

    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        try:
            return func(*args, **kwargs)
        except BoostingError as e:
            # fields are bound, not passed as kwargs: messages may contain braces
            logger = UnifiedLogger.get_logger(f"command.{func.__name__}").bind(
                log_type="command",
                command=func.__name__,
                status="error",
                error_message=e.message,
                error_code=e.code,
            )
            logger.warning(f"{func.__name__} rejected: {e.message}")
            raise
        except Exception as e:
            logger = UnifiedLogger.get_logger(f"command.{func.__name__}").bind(
                log_type="command",
                command=func.__name__,
                status="error",
                error_message=str(e),
                exception_type=type(e).__name__,
            )
            logger.error(f"Exception in {func.__name__}: {traceback.format_exc()}")
            raise

    return wrapper
