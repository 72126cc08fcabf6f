"""
Base classes for logging destinations.

This module defines the interface for pluggable run-log destinations and the
log entry structure shared by all of them.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

LOG_TYPES = ("command", "run", "round", "internal")


@dataclass
class LogEntry:
    """Unified log entry structure for all destinations."""
    correlation_id: str
    timestamp: datetime
    level: str
    log_type: str  # one of LOG_TYPES
    message: str
    command: Optional[str] = None
    duration_ms: Optional[float] = None
    status: Optional[str] = None
    method: Optional[str] = None
    seed: Optional[int] = None
    theta: Optional[float] = None
    round: Optional[int] = None
    input_args: Optional[Dict[str, Any]] = None
    error_message: Optional[str] = None
    module: Optional[str] = None
    function: Optional[str] = None
    line: Optional[int] = None
    thread_name: Optional[str] = None
    process_id: Optional[int] = None
    extra_data: Optional[Dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        payload = dict(self.__dict__)
        payload["timestamp"] = self.timestamp.isoformat()
        return payload


@dataclass
class DestinationConfig:
    """Configuration for a log destination."""
    type: str
    enabled: bool = True
    settings: Dict[str, Any] = field(default_factory=dict)


class LogDestination(ABC):
    """Abstract base class for all log destinations.

    Implementations own their resources (connections, file handles) and must
    tolerate writes from several worker threads.
    """

    @abstractmethod
    def write(self, entry: LogEntry) -> None:
        """Write a log entry to the destination."""

    @abstractmethod
    def query(self, **filters) -> List[LogEntry]:
        """Query logs with filters.

        Supported filters should include: correlation_id, command, level,
        log_type, method, start_time, end_time, limit.
        """

    @abstractmethod
    def close(self) -> None:
        """Flush and release resources."""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
