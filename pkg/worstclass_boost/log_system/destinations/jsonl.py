"""
JSON-lines file destination.

Appends one JSON object per log entry; handy for shipping the audit trail of an
experiment directory alongside its results.
"""

import json
import threading
from datetime import datetime
from pathlib import Path
from typing import List

from .base import LogDestination, LogEntry
from worstclass_boost.config import AppConfig


class JsonlDestination(LogDestination):
    """Append-only JSON-lines log file."""

    def __init__(self, config: AppConfig, **settings):
        self.config = config
        self._path = Path(settings.get("path") or config.log_file_path)
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @property
    def path(self) -> Path:
        return self._path

    def write(self, entry: LogEntry) -> None:
        line = json.dumps(entry.to_dict(), default=str)
        with self._lock, open(self._path, "a", encoding="utf-8") as f:
            f.write(line + "\n")

    def query(self, **filters) -> List[LogEntry]:
        if not self._path.exists():
            return []
        entries = []
        with open(self._path, encoding="utf-8") as f:
            for line in f:
                data = json.loads(line)
                data["timestamp"] = datetime.fromisoformat(data["timestamp"])
                entry = LogEntry(**data)
                if all(getattr(entry, k) == v for k, v in filters.items() if k != "limit"):
                    entries.append(entry)
        entries.reverse()
        return entries[: int(filters.get("limit", 1000))]

    def close(self) -> None:
        pass
