"""Dataset file I/O.

CSV files carry a header ``label,f1,...,fd`` and 1-based integer labels. The
JSON-lines variant holds one ``{"label": k, "features": [...]}`` object per
line. Floats are written in shortest round-trip form, so saving and loading
reproduces a dataset bit for bit.
"""

import json
import re
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from worstclass_boost.models.errors import LabelError, ParseError
from worstclass_boost.models.schemas import LabeledDataset

PathLike = Union[str, Path]
JSONL_SUFFIXES = (".jsonl", ".json", ".ndjson")
TOKENIZER_LINE = re.compile(r"fields in line (\d+), saw (\d+)")


def _first_bad_row(valid: pd.Series) -> Optional[int]:
    bad = np.flatnonzero(~valid.to_numpy())
    return int(bad[0]) if bad.size else None


def _check_labels(labels: np.ndarray, num_classes: Optional[int], line_numbers: np.ndarray) -> int:
    K = int(num_classes) if num_classes is not None else int(labels.max(initial=1))
    bad = np.flatnonzero((labels < 1) | (labels > K))
    if bad.size:
        i = int(bad[0])
        raise LabelError(int(labels[i]), K, line=int(line_numbers[i]))
    return K


def load_csv(path: PathLike, num_classes: Optional[int] = None) -> LabeledDataset:
    """Read a labeled CSV file.

    Raises:
        ParseError: Bad header, a row with the wrong number of fields or a
            non-numeric field (1-based file line)
        LabelError: Label outside 1..K
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        match = TOKENIZER_LINE.search(str(e))
        if match is None:
            raise ParseError(f"cannot read {path}: {e}") from e
        raise ParseError(f"row has {match.group(2)} fields", line=int(match.group(1))) from e
    except (pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if len(frame) and not isinstance(frame.index, pd.RangeIndex):
        # pandas turns a surplus first column into the index when the first row is one field too long
        raise ParseError(f"row has {frame.shape[1] + 1} fields, header has {frame.shape[1]}", line=2)
    columns = [str(c).strip() for c in frame.columns]
    if len(columns) < 2 or columns[0] != "label":
        raise ParseError(f"header must be 'label,f1,...,fd', got {','.join(columns)!r}", line=1)

    labels_raw = pd.to_numeric(frame.iloc[:, 0], errors="coerce")
    valid = labels_raw.notna() & (labels_raw == np.floor(labels_raw))
    feature_cols = frame.iloc[:, 1:]
    numeric = feature_cols.apply(pd.to_numeric, errors="coerce")
    valid &= numeric.notna().all(axis=1)
    bad = _first_bad_row(valid)
    if bad is not None:
        raise ParseError(f"malformed row {frame.iloc[bad].tolist()!r}", line=bad + 2)

    labels = labels_raw.to_numpy(dtype=np.int64)
    K = _check_labels(labels, num_classes, np.arange(labels.shape[0]) + 2)
    # astype(float) parses each field exactly, unlike the fast numeric parser
    features = feature_cols.to_numpy(dtype=str).astype(np.float64)
    return LabeledDataset.from_labels(features, labels, K)


def save_csv(data: LabeledDataset, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(data.features, columns=[f"f{j + 1}" for j in range(data.dim)])
    frame.insert(0, "label", data.external_labels)
    frame.to_csv(path, index=False)
    return path


def load_jsonl(path: PathLike, num_classes: Optional[int] = None) -> LabeledDataset:
    """Read the JSON-lines variant; blank lines are skipped.

    Raises:
        ParseError: Invalid JSON, missing fields or ragged feature vectors
        LabelError: Label outside 1..K
    """
    labels = []
    rows = []
    lines = []
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                label = record["label"]
                features = [float(v) for v in record["features"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise ParseError(f"malformed record: {e}", line=number) from e
            if isinstance(label, bool) or not isinstance(label, int):
                raise ParseError(f"label must be an integer, got {label!r}", line=number)
            if rows and len(features) != len(rows[0]):
                raise ParseError(f"expected {len(rows[0])} features, got {len(features)}", line=number)
            labels.append(label)
            rows.append(features)
            lines.append(number)
    if not rows:
        raise ParseError(f"{path} holds no records")

    label_array = np.asarray(labels, dtype=np.int64)
    K = _check_labels(label_array, num_classes, np.asarray(lines))
    return LabeledDataset.from_labels(np.asarray(rows, dtype=np.float64), label_array, K)


def save_jsonl(data: LabeledDataset, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for label, row in zip(data.external_labels.tolist(), data.features.tolist()):
            f.write(json.dumps({"label": label, "features": row}) + "\n")
    return path


def load_dataset(path: PathLike, num_classes: Optional[int] = None) -> LabeledDataset:
    """Load CSV or JSON lines, chosen by file suffix."""
    if Path(path).suffix.lower() in JSONL_SUFFIXES:
        return load_jsonl(path, num_classes)
    return load_csv(path, num_classes)


def save_dataset(data: LabeledDataset, path: PathLike) -> Path:
    if Path(path).suffix.lower() in JSONL_SUFFIXES:
        return save_jsonl(data, path)
    return save_csv(data, path)
