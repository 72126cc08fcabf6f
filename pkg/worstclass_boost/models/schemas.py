"""Data models for worstclass_boost.

This module defines the core data structures shared by every service: labeled
datasets, class weights on the simplex, feedback vectors, error reports, the
hypothesis contract and majority-vote ensembles.

Class indices are 0-based inside the library; files, the CLI and JSON documents
use 1-based labels. ``LabeledDataset.from_labels`` and ``external_labels`` are
the converters.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from worstclass_boost.models.errors import ContractViolation, DimensionError, LabelError

SIMPLEX_TOLERANCE = 1e-9


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature vectors with class labels in [K].

    ``labels`` holds 0-based class indices. Empty classes are representable so
    that operations can report ``EmptyClass``; see ``require_nonempty``.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise DimensionError(f"features must be a 2-D array, got shape {features.shape}")
        labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
        if labels.shape[0] != features.shape[0]:
            raise DimensionError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if self.num_classes < 1:
            raise ContractViolation(f"num_classes must be positive, got {self.num_classes}")
        bad = (labels < 0) | (labels >= self.num_classes)
        if bad.any():
            raise LabelError(int(labels[bad][0]) + 1, self.num_classes)
        object.__setattr__(self, "features", _readonly(features))
        object.__setattr__(self, "labels", _readonly(labels))

    @classmethod
    def from_labels(
        cls,
        features: Any,
        labels: Sequence[int],
        num_classes: Optional[int] = None,
    ) -> "LabeledDataset":
        """Build a dataset from 1-based external labels."""
        external = np.asarray(labels, dtype=np.int64).reshape(-1)
        if num_classes is None:
            num_classes = int(external.max()) if external.size else 1
        bad = (external < 1) | (external > num_classes)
        if bad.any():
            raise LabelError(int(external[bad][0]), num_classes)
        return cls(features=features, labels=external - 1, num_classes=num_classes)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def class_counts(self) -> np.ndarray:
        """n_k for every class (0 for empty classes)."""
        return np.bincount(self.labels, minlength=self.num_classes)

    @property
    def external_labels(self) -> np.ndarray:
        return self.labels + 1

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.num_classes)

    def equals(self, other: "LabeledDataset") -> bool:
        return (
            self.num_classes == other.num_classes
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True, eq=False)
class ClassWeights:
    """A point on the simplex: non-negative weights summing to one."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64, copy=True).reshape(-1)
        if w.size == 0:
            raise ContractViolation("class weights must be non-empty")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ContractViolation("class weights must be finite and non-negative")
        if abs(float(w.sum()) - 1.0) > SIMPLEX_TOLERANCE:
            raise ContractViolation(f"class weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "w", _readonly(w))

    @classmethod
    def uniform(cls, size: int) -> "ClassWeights":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return int(self.w.shape[0])


@dataclass(frozen=True, eq=False)
class FeedbackVector:
    """Per-class success indicators r_t with entries exactly 0 or 1."""

    r: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.r).reshape(-1)
        if not np.isin(raw, (0, 1)).all():
            raise ContractViolation(f"feedback must be binary, got {raw.tolist()}")
        object.__setattr__(self, "r", _readonly(raw.astype(np.int8)))

    def __len__(self) -> int:
        return int(self.r.shape[0])


@dataclass(frozen=True)
class ClassErrorReport:
    """Per-class, worst-class and pooled average error of a predictor."""

    per_class_error: Tuple[float, ...]
    worst_class_error: float
    average_error: float

    @property
    def worst_class(self) -> int:
        """0-based index of the first class attaining the worst error."""
        return int(np.argmax(self.per_class_error))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_class_error": list(self.per_class_error),
            "worst_class_error": self.worst_class_error,
            "average_error": self.average_error,
            "worst_class": self.worst_class + 1,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassErrorReport":
        return cls(
            per_class_error=tuple(float(v) for v in data["per_class_error"]),
            worst_class_error=float(data["worst_class_error"]),
            average_error=float(data["average_error"]),
        )


@runtime_checkable
class Hypothesis(Protocol):
    """A trained, immutable hard-label predictor over [K] (0-based)."""

    num_classes: int
    n_features: int

    def predict(self, features: Sequence[float]) -> int: ...

    def predict_batch(self, features: np.ndarray) -> np.ndarray: ...

    def to_dict(self) -> Dict[str, Any]: ...


@dataclass(frozen=True)
class Ensemble:
    """Unweighted majority vote over an ordered list of hypotheses.

    Ties between classes go to the smallest class index.
    """

    members: Tuple[Hypothesis, ...]
    num_classes: int
    n_features: int = field(default=0)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ContractViolation("an ensemble needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))
        if not self.n_features:
            object.__setattr__(self, "n_features", int(self.members[0].n_features))

    def __len__(self) -> int:
        return len(self.members)

    def vote_counts(self, features: np.ndarray) -> np.ndarray:
        """(n, K) matrix of member votes per class."""
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        counts = np.zeros((X.shape[0], self.num_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for member in self.members:
            # one vote per row per member, so a fancy-index increment is exact
            counts[rows, member.predict_batch(X)] += 1
        return counts

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum, i.e. the smallest class index on ties
        return np.argmax(self.vote_counts(features), axis=1)

    def predict(self, features: Sequence[float]) -> int:
        return int(self.predict_batch(np.asarray(features, dtype=np.float64).reshape(1, -1))[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "ensemble",
            "num_classes": self.num_classes,
            "n_features": self.n_features,
            "members": [m.to_dict() for m in self.members],
        }
