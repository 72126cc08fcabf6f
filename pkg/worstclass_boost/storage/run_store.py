"""Content-addressed storage for per-run results.

Each sweep cell is stored as ``runs/<key>.json`` where the key hashes the
experiment-level settings together with the cell coordinates, so re-running a
sweep skips cells that already finished. Writes go through a temporary file in
the same directory followed by ``os.replace``, which makes them atomic.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union


def run_key(settings: Dict[str, Any], cell: Dict[str, Any]) -> str:
    """Stable hash of canonical JSON for (settings, cell)."""
    canonical = json.dumps({"settings": settings, "cell": cell}, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:20]


def write_json_atomic(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, default=str)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


class RunStore:
    """Directory of per-run JSON documents keyed by ``run_key``."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.runs_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: str) -> Path:
        return self.runs_dir / f"{key}.json"

    def load(self, key: str) -> Optional[Dict[str, Any]]:
        path = self.path_for(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as f:
            return json.load(f)

    def save(self, key: str, payload: Dict[str, Any]) -> Path:
        return write_json_atomic(self.path_for(key), payload)

    def __iter__(self) -> Iterator[Dict[str, Any]]:
        for path in sorted(self.runs_dir.glob("*.json")):
            with open(path, encoding="utf-8") as f:
                yield json.load(f)
