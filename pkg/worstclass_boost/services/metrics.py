"""Class-wise error metrics, zero-one penalties and majority voting.

All functions here are pure: they read immutable datasets and trained
hypotheses and never mutate them, so they are safe to call concurrently.
"""

from typing import List, Sequence

import numpy as np

from worstclass_boost.models.errors import ConfigError, ContractViolation, EmptyClass
from worstclass_boost.models.schemas import (
    ClassErrorReport,
    Ensemble,
    Hypothesis,
    LabeledDataset,
)


# class errors are ratios of small integers; 1 - theta is not exact for grid values like 0.7
PENALTY_TOLERANCE = 1e-12


def validate_theta(theta: float) -> float:
    """Return ``theta`` if it lies in [0, 1), else raise ``ConfigError``."""
    if not (0.0 <= theta < 1.0):
        raise ConfigError(f"theta must lie in [0, 1), got {theta}")
    return float(theta)


def require_nonempty(data: LabeledDataset) -> np.ndarray:
    """Return n_k for every class, raising ``EmptyClass`` for the first empty one."""
    counts = data.class_counts
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyClass(int(empty[0]) + 1)
    return counts


def partition_by_class(data: LabeledDataset) -> List[np.ndarray]:
    """Split instance indices into S_1..S_K (list position k holds class k, 0-based)."""
    require_nonempty(data)
    return [np.flatnonzero(data.labels == k) for k in range(data.num_classes)]


def class_errors_from_predictions(data: LabeledDataset, predictions: np.ndarray) -> np.ndarray:
    """R_{S_k} for every class, given predictions for every instance of ``data``."""
    counts = require_nonempty(data)
    wrong = np.asarray(predictions).reshape(-1) != data.labels
    if wrong.shape[0] != data.n:
        raise ContractViolation(f"{wrong.shape[0]} predictions for {data.n} instances")
    mistakes = np.bincount(data.labels[wrong], minlength=data.num_classes)
    return mistakes / counts


def class_wise_error(h: Hypothesis, data: LabeledDataset, k: int) -> float:
    """Fraction of class-k instances that ``h`` misclassifies."""
    counts = data.class_counts
    if not 0 <= k < data.num_classes:
        raise ContractViolation(f"class index {k} outside 0..{data.num_classes - 1}")
    if counts[k] == 0:
        raise EmptyClass(k + 1)
    members = data.features[data.labels == k]
    mistakes = int(np.count_nonzero(h.predict_batch(members) != k))
    return mistakes / int(counts[k])


def error_report_from_predictions(data: LabeledDataset, predictions: np.ndarray) -> ClassErrorReport:
    per_class = class_errors_from_predictions(data, predictions)
    pooled = float(np.count_nonzero(np.asarray(predictions) != data.labels)) / data.n
    return ClassErrorReport(
        per_class_error=tuple(float(e) for e in per_class),
        worst_class_error=float(per_class.max()),
        average_error=pooled,
    )


def worst_class_error(h: Hypothesis, data: LabeledDataset) -> ClassErrorReport:
    """Per-class errors, their maximum, and the pooled-sample error of ``h``."""
    require_nonempty(data)
    return error_report_from_predictions(data, h.predict_batch(data.features))


def accuracy_floor(theta: float) -> float:
    """Smallest class error that counts as a failure at ``theta``."""
    validate_theta(theta)
    return 1.0 - theta - PENALTY_TOLERANCE


def penalties_from_errors(class_errors: Sequence[float], theta: float) -> np.ndarray:
    """Vector of zero-one penalties: 1 where the class error is >= 1 - theta."""
    return (np.asarray(class_errors, dtype=np.float64) >= accuracy_floor(theta)).astype(np.int8)


def zero_one_penalty(h: Hypothesis, data: LabeledDataset, k: int, theta: float) -> int:
    """1 iff the class-k error of ``h`` is at least 1 - theta."""
    return int(class_wise_error(h, data, k) >= accuracy_floor(theta))


def weighted_error(data: LabeledDataset, predictions: np.ndarray, instance_weights: np.ndarray) -> float:
    """Sum of instance weights over misclassified instances."""
    wrong = np.asarray(predictions).reshape(-1) != data.labels
    return float(np.dot(np.asarray(instance_weights, dtype=np.float64), wrong))


def majority_vote(ensemble: Ensemble, features: Sequence[float]) -> int:
    """Class with the most member votes; ties go to the smallest class index."""
    return ensemble.predict(features)
