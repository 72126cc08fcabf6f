"""Test configuration for pytest.

Every test runs against temporary config, data and log directories so the
user's real run-log database and experiment outputs are never touched.
"""

import itertools
from typing import Dict, Iterator, List, Sequence

import numpy as np
import pytest

import worstclass_boost.config as config_module
from worstclass_boost.models.schemas import LabeledDataset


@pytest.fixture
def anyio_backend():
    """Configure anyio to use asyncio backend."""
    return "asyncio"


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    """Point all platform directories at a per-test temporary tree."""
    for var, name in (("WCBOOST_CONFIG_DIR", "config"), ("WCBOOST_DATA_DIR", "data"), ("WCBOOST_LOG_DIR", "logs")):
        monkeypatch.setenv(var, str(tmp_path / name))
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    monkeypatch.setattr(config_module, "_config", None)
    yield tmp_path


class ConstantModel:
    """Hypothesis predicting one 0-based class everywhere."""

    def __init__(self, label: int, num_classes: int, n_features: int = 1):
        self.label = label
        self.num_classes = num_classes
        self.n_features = n_features

    def predict_batch(self, features):
        return np.full(np.atleast_2d(features).shape[0], self.label, dtype=np.int64)

    def predict(self, features):
        return self.label

    def to_dict(self):
        return {"type": "constant", "num_classes": self.num_classes, "n_features": self.n_features,
                "class": self.label + 1}


class TableModel:
    """Hypothesis returning fixed predictions for the rows of one dataset, by row index in feature 0."""

    def __init__(self, predictions: Sequence[int], num_classes: int):
        self.predictions = np.asarray(predictions, dtype=np.int64)
        self.num_classes = num_classes
        self.n_features = 1

    def predict_batch(self, features):
        idx = np.atleast_2d(features)[:, 0].astype(np.int64)
        return self.predictions[idx]

    def predict(self, features):
        return int(self.predictions[int(features[0])])

    def to_dict(self):
        return {"type": "table"}


def indexed_dataset(labels_1based: Sequence[int], num_classes: int) -> LabeledDataset:
    """Dataset whose single feature is the row index, so TableModel can address rows."""
    n = len(labels_1based)
    return LabeledDataset.from_labels(np.arange(n, dtype=np.float64).reshape(-1, 1), labels_1based, num_classes)


def brute_class_errors(labels: Sequence[int], predictions: Sequence[int], K: int) -> List[float]:
    """Class-wise error by explicit counting loops."""
    errors = []
    for k in range(K):
        total = 0
        wrong = 0
        for y, p in zip(labels, predictions):
            if y == k:
                total += 1
                if p != k:
                    wrong += 1
        errors.append(wrong / total)
    return errors


def brute_vote(votes: Sequence[int], K: int) -> int:
    """Majority vote by scanning classes in order; first maximum wins."""
    best, best_count = 0, -1
    for k in range(K):
        count = sum(1 for v in votes if v == k)
        if count > best_count:
            best, best_count = k, count
    return best


def small_labelings(max_n: int = 8, max_k: int = 3) -> Iterator[Dict]:
    """Every (K, labels, predictions) with all classes present, for small n."""
    rng = np.random.default_rng(1234)
    for K in range(2, max_k + 1):
        for n in range(K, max_n + 1):
            for _ in range(6):
                labels = np.concatenate([np.arange(K), rng.integers(0, K, size=n - K)])
                rng.shuffle(labels)
                predictions = rng.integers(0, K, size=n)
                yield {"K": K, "labels": labels, "predictions": predictions}


@pytest.fixture
def xor_data() -> LabeledDataset:
    """Four-point XOR with two copies of each corner."""
    X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]] * 2, dtype=np.float64)
    y = [1, 1, 2, 2] * 2
    return LabeledDataset.from_labels(X, y, 2)


@pytest.fixture
def separable_data() -> LabeledDataset:
    """Three well-separated 2-D clusters, 20 points each."""
    rng = np.random.default_rng(7)
    centers = np.array([[-5.0, 0.0], [0.0, 5.0], [5.0, 0.0]])
    X = np.vstack([c + 0.3 * rng.standard_normal((20, 2)) for c in centers])
    y = np.repeat([1, 2, 3], 20)
    return LabeledDataset.from_labels(X, y, 3)


@pytest.fixture
def five_class_data() -> LabeledDataset:
    """Five 1-D classes of 10 points, distinct values."""
    X = np.arange(50, dtype=np.float64).reshape(-1, 1)
    y = np.repeat([1, 2, 3, 4, 5], 10)
    return LabeledDataset.from_labels(X, y, 5)


def all_binary_sequences(T: int, K: int) -> Iterator[np.ndarray]:
    for bits in itertools.product((0, 1), repeat=T * K):
        yield np.asarray(bits, dtype=np.int8).reshape(T, K)
