"""Storage layer for worstclass_boost: dataset files and the run store."""

from .dataset_files import load_csv, load_dataset, load_jsonl, save_csv, save_dataset, save_jsonl
from .run_store import RunStore, run_key, write_json_atomic

__all__ = [
    "load_csv",
    "save_csv",
    "load_jsonl",
    "save_jsonl",
    "load_dataset",
    "save_dataset",
    "RunStore",
    "run_key",
    "write_json_atomic",
]
