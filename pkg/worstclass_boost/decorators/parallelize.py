"""Parallel execution of independent experiment cells.

``parallelize`` transforms ``func(**kwargs) -> R`` into
``func(kwargs_list: List[Dict]) -> List[R | CellFailure]``. Each call runs in a
worker thread through anyio, bounded by a capacity limiter. Results come back
in input order. A failing cell does not cancel its siblings: its exception is
captured as a ``CellFailure`` in its slot.

Usage:
    @parallelize(max_workers=4)
    def run_cell(method: str, seed: int) -> dict: ...

    results = run_cell([{"method": "plain_tree", "seed": 1}, ...])
"""

import inspect
from dataclasses import dataclass
from functools import partial, wraps
from typing import Any, Callable, Dict, List, Optional

import anyio
import anyio.to_thread

from worstclass_boost.log_system.unified_logger import UnifiedLogger


@dataclass
class CellFailure:
    """Placeholder for a cell whose execution raised."""
    index: int
    kwargs: Dict[str, Any]
    error: BaseException

    @property
    def message(self) -> str:
        return f"{type(self.error).__name__}: {self.error}"


async def run_cells(func: Callable[..., Any], kwargs_list: List[Dict[str, Any]], max_workers: int) -> List[Any]:
    """Run ``func`` once per kwargs dict in worker threads, preserving order."""
    results: List[Any] = [None] * len(kwargs_list)
    limiter = anyio.CapacityLimiter(max(1, max_workers))

    async def run_one(index: int, kwargs: Dict[str, Any]) -> None:
        try:
            results[index] = await anyio.to_thread.run_sync(partial(func, **kwargs), limiter=limiter)
        except Exception as e:
            results[index] = CellFailure(index=index, kwargs=kwargs, error=e)

    async with anyio.create_task_group() as tg:
        for index, kwargs in enumerate(kwargs_list):
            tg.start_soon(run_one, index, kwargs)
    return results


def parallelize(
    func: Optional[Callable[..., Any]] = None,
    *,
    max_workers: int = 4,
) -> Callable[..., Any]:
    """Decorator enabling batched, thread-parallel execution of ``func``.

    Raises:
        TypeError: If the batch is not a list of dicts, or an item does not
            bind to ``func``'s signature
    """

    def decorator(f: Callable[..., Any]) -> Callable[[List[Dict[str, Any]]], List[Any]]:
        signature = inspect.signature(f)

        @wraps(f)
        def wrapper(kwargs_list: List[Dict[str, Any]], workers: Optional[int] = None) -> List[Any]:
            if not isinstance(kwargs_list, list):
                raise TypeError("Parallel execution requires a List[Dict] parameter")
            for i, kwargs in enumerate(kwargs_list):
                if not isinstance(kwargs, dict):
                    raise TypeError(f"Item {i} in kwargs_list must be a dict, got {type(kwargs).__name__}")
                signature.bind(**kwargs)
            if not kwargs_list:
                return []

            n_workers = workers or max_workers
            UnifiedLogger.get_logger("parallelize").debug(
                f"Parallel execution of {f.__name__} with {len(kwargs_list)} cells on {n_workers} workers",
                log_type="internal",
            )
            return anyio.run(run_cells, f, kwargs_list, n_workers)

        wrapper.serial = f
        return wrapper

    if func is not None:
        return decorator(func)
    return decorator
