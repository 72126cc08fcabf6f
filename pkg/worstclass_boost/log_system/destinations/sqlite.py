"""
SQLite implementation of the LogDestination interface.

Stores structured run logs (commands, runs, rounds) in a local database with
thread-local connections, so sweep cells running in worker threads can log
concurrently.
"""

import json
import sqlite3
import threading
from datetime import datetime
from pathlib import Path
from typing import List

from ..destinations.base import LogDestination, LogEntry
from worstclass_boost.config import AppConfig

_COLUMNS = (
    "correlation_id", "timestamp", "level", "log_type", "message", "command",
    "duration_ms", "status", "method", "seed", "theta", "round", "input_args",
    "error_message", "module", "function", "line", "thread_name", "process_id",
    "extra_data",
)


class SQLiteDestination(LogDestination):
    """SQLite implementation of LogDestination."""

    def __init__(self, config: AppConfig, **settings):
        self.config = config
        self._db_path = Path(settings.get("path") or config.run_log_db_path)
        self._db_path.parent.mkdir(parents=True, exist_ok=True)
        self._local = threading.local()
        self._initialize_database()

    def _get_connection(self) -> sqlite3.Connection:
        """Get a thread-local database connection."""
        if getattr(self._local, "connection", None) is None:
            connection = sqlite3.connect(str(self._db_path), check_same_thread=False, timeout=30.0)
            connection.row_factory = sqlite3.Row
            try:
                connection.execute("PRAGMA journal_mode = WAL")
            except sqlite3.OperationalError:
                # some filesystems refuse WAL
                connection.execute("PRAGMA journal_mode = DELETE")
            self._local.connection = connection
        return self._local.connection

    def _initialize_database(self) -> None:
        conn = self._get_connection()
        conn.executescript("""
            CREATE TABLE IF NOT EXISTS run_logs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                correlation_id TEXT NOT NULL,
                timestamp DATETIME DEFAULT CURRENT_TIMESTAMP,
                level TEXT NOT NULL,
                log_type TEXT CHECK(log_type IN ('command', 'run', 'round', 'internal')),
                message TEXT NOT NULL,
                command TEXT,
                duration_ms REAL,
                status TEXT CHECK(status IN ('success', 'error', 'running', NULL)),
                method TEXT,
                seed INTEGER,
                theta REAL,
                round INTEGER,
                input_args TEXT,  -- JSON
                error_message TEXT,
                module TEXT,
                function TEXT,
                line INTEGER,
                thread_name TEXT,
                process_id INTEGER,
                extra_data TEXT,  -- JSON
                created_at DATETIME DEFAULT CURRENT_TIMESTAMP
            );

            CREATE INDEX IF NOT EXISTS idx_correlation_id ON run_logs(correlation_id);
            CREATE INDEX IF NOT EXISTS idx_timestamp ON run_logs(timestamp);
            CREATE INDEX IF NOT EXISTS idx_log_type ON run_logs(log_type);
            CREATE INDEX IF NOT EXISTS idx_method ON run_logs(method);
        """)
        conn.commit()

    def write(self, entry: LogEntry) -> None:
        conn = self._get_connection()
        row = entry.to_dict()
        row["input_args"] = json.dumps(entry.input_args, default=str) if entry.input_args else None
        row["extra_data"] = json.dumps(entry.extra_data, default=str) if entry.extra_data else None
        placeholders = ", ".join("?" for _ in _COLUMNS)
        conn.execute(
            f"INSERT INTO run_logs ({', '.join(_COLUMNS)}) VALUES ({placeholders})",
            tuple(row[c] for c in _COLUMNS),
        )
        conn.commit()

    def query(self, **filters) -> List[LogEntry]:
        """Query logs; filters: correlation_id, command, level, log_type, method,
        start_time, end_time, limit (default 1000). Newest first."""
        conn = self._get_connection()
        query = "SELECT * FROM run_logs WHERE 1=1"
        params: list = []
        for name in ("correlation_id", "command", "level", "log_type", "method"):
            if name in filters:
                query += f" AND {name} = ?"
                params.append(filters[name])
        for name, op in (("start_time", ">="), ("end_time", "<=")):
            if name in filters:
                value = filters[name]
                query += f" AND timestamp {op} ?"
                params.append(value.isoformat() if isinstance(value, datetime) else str(value))
        query += " ORDER BY id DESC LIMIT ?"
        params.append(int(filters.get("limit", 1000)))

        entries = []
        for row in conn.execute(query, params):
            data = {c: row[c] for c in _COLUMNS}
            data["timestamp"] = datetime.fromisoformat(row["timestamp"])
            data["input_args"] = json.loads(row["input_args"]) if row["input_args"] else None
            data["extra_data"] = json.loads(row["extra_data"]) if row["extra_data"] else {}
            entries.append(LogEntry(**data))
        return entries

    def close(self) -> None:
        connection = getattr(self._local, "connection", None)
        if connection is not None:
            connection.close()
            self._local.connection = None
