from .base import DestinationConfig, LogDestination, LogEntry
from .factory import CompositeDestination, LogDestinationFactory
from .jsonl import JsonlDestination
from .sqlite import SQLiteDestination

__all__ = [
    "LogDestination",
    "LogEntry",
    "DestinationConfig",
    "SQLiteDestination",
    "JsonlDestination",
    "CompositeDestination",
    "LogDestinationFactory",
]
