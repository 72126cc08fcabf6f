"""Synthetic Gaussian-blob generators and dataset utilities.

The balanced toy places five classes in the plane with class 2 sitting
between classes 1 and 3 and spread wider than its neighbours, so a classifier
minimizing average error sacrifices it. The imbalanced toy has four
overlapping classes where class 2 is ten times rarer than the others.

Sampling uses numpy's PCG64 generator. The seed is split through a
``SeedSequence`` into independent train and test streams, so the training
sample for a seed does not depend on the requested test size.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import multivariate_normal

from worstclass_boost.models.errors import ConfigError, DimensionError
from worstclass_boost.models.schemas import LabeledDataset

BALANCED_TRAIN = 100
BALANCED_TEST = 100_000
IMBALANCE_RATIO = 10
MINORITY_TEST = 10_000
MAJORITY_TEST = 100_000


@dataclass(frozen=True)
class ClassBlob:
    """One Gaussian class: mean, covariance and requested sample sizes."""

    mean: Tuple[float, float]
    cov: Tuple[Tuple[float, float], Tuple[float, float]]
    n_train: int
    n_test: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.shape != (2,) or cov.shape != (2, 2):
            raise DimensionError(f"blobs are 2-D: mean shape {mean.shape}, covariance shape {cov.shape}")
        if not np.allclose(cov, cov.T):
            raise ConfigError("covariance must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            raise ConfigError("covariance must be positive-definite") from e
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError(f"class sample sizes must be at least 1, got {self.n_train}/{self.n_test}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": list(self.mean),
            "cov": [list(row) for row in self.cov],
            "n_train": self.n_train,
            "n_test": self.n_test,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassBlob":
        return cls(
            mean=tuple(float(v) for v in data["mean"]),
            cov=tuple(tuple(float(v) for v in row) for row in data["cov"]),
            n_train=int(data["n_train"]),
            n_test=int(data["n_test"]),
        )


@dataclass(frozen=True)
class BlobSpec:
    """Gaussian mixture with one blob per class (class k+1 is ``blobs[k]``)."""

    blobs: Tuple[ClassBlob, ...]

    def __post_init__(self):
        if len(self.blobs) < 2:
            raise ConfigError("a blob spec needs at least 2 classes")
        object.__setattr__(self, "blobs", tuple(self.blobs))

    @property
    def num_classes(self) -> int:
        return len(self.blobs)

    def with_counts(self, n_train: Sequence[int], n_test: Sequence[int]) -> "BlobSpec":
        return BlobSpec(
            tuple(replace(b, n_train=int(a), n_test=int(t)) for b, a, t in zip(self.blobs, n_train, n_test))
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"blobs": [b.to_dict() for b in self.blobs]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlobSpec":
        return cls(tuple(ClassBlob.from_dict(b) for b in data["blobs"]))


def _isotropic(var: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    return ((var, 0.0), (0.0, var))


def default_balanced_spec() -> BlobSpec:
    """Five blobs; class 2 sits between classes 1 and 3 and is twice as wide."""
    means = [(-1.6, 0.0), (0.0, 0.0), (1.6, 0.0), (0.0, 2.5), (0.0, -2.5)]
    covs = [_isotropic(0.5), ((1.0, 0.0), (0.0, 0.8)), _isotropic(0.5), _isotropic(0.6), _isotropic(0.6)]
    return BlobSpec(tuple(ClassBlob(m, c, BALANCED_TRAIN, BALANCED_TEST) for m, c in zip(means, covs)))


def default_imbalanced_spec(min_nk: int = 100) -> BlobSpec:
    """Four overlapping blobs around the origin; class 2 is the minority."""
    if min_nk < 1:
        raise ConfigError(f"min_nk must be at least 1, got {min_nk}")
    means = [(-1.2, 0.0), (0.0, 0.9), (1.2, 0.0), (0.0, -1.2)]
    covs = [_isotropic(0.6), _isotropic(0.6), _isotropic(0.6), _isotropic(0.6)]
    majority = IMBALANCE_RATIO * min_nk
    train = [majority, min_nk, majority, majority]
    test = [MAJORITY_TEST, MINORITY_TEST, MAJORITY_TEST, MAJORITY_TEST]
    return BlobSpec(tuple(ClassBlob(m, c, a, t) for m, c, a, t in zip(means, covs, train, test)))


def _sample(spec: BlobSpec, rng: np.random.Generator, split: str) -> LabeledDataset:
    features: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for k, blob in enumerate(spec.blobs):
        count = blob.n_train if split == "train" else blob.n_test
        features.append(rng.multivariate_normal(blob.mean, blob.cov, size=count, method="cholesky"))
        labels.append(np.full(count, k, dtype=np.int64))
    return LabeledDataset(np.vstack(features), np.concatenate(labels), spec.num_classes)


def sample_blobs(spec: BlobSpec, seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    """Draw (train, test) from ``spec`` with independent streams derived from ``seed``."""
    train_seq, test_seq = np.random.SeedSequence(seed).spawn(2)
    train = _sample(spec, np.random.default_rng(train_seq), "train")
    test = _sample(spec, np.random.default_rng(test_seq), "test")
    return train, test


def gen_balanced_toy(seed: int, spec: Optional[BlobSpec] = None) -> Tuple[LabeledDataset, LabeledDataset]:
    """5 classes in 2-D, 100 training and 100000 test instances per class."""
    return sample_blobs(spec or default_balanced_spec(), seed)


def gen_imbalanced_toy(
    min_nk: int, seed: int, spec: Optional[BlobSpec] = None
) -> Tuple[LabeledDataset, LabeledDataset]:
    """4 classes in 2-D; class 2 has ``min_nk`` training instances, the rest 10x as many."""
    counts = default_imbalanced_spec(min_nk)
    if spec is None:
        return sample_blobs(counts, seed)
    if spec.num_classes != 4:
        raise ConfigError(f"the imbalanced toy has 4 classes, spec has {spec.num_classes}")
    return sample_blobs(
        spec.with_counts([b.n_train for b in counts.blobs], [b.n_test for b in counts.blobs]), seed
    )


GENERATORS = {
    "balanced_toy": gen_balanced_toy,
    "imbalanced_toy": gen_imbalanced_toy,
}


def stratified_split(
    data: LabeledDataset, ratio: float = 0.7, seed: int = 0
) -> Tuple[LabeledDataset, LabeledDataset]:
    """Split each class ``ratio`` : ``1 - ratio`` into (train, validation).

    Every class with at least two instances keeps one or more on each side.
    """
    if not (0.0 < ratio < 1.0):
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train_idx: List[np.ndarray] = []
    valid_idx: List[np.ndarray] = []
    for k in range(data.num_classes):
        members = rng.permutation(np.flatnonzero(data.labels == k))
        if members.size == 0:
            continue
        cut = int(round(ratio * members.size))
        if members.size >= 2:
            cut = min(max(cut, 1), members.size - 1)
        train_idx.append(members[:cut])
        valid_idx.append(members[cut:])
    return data.subset(np.sort(np.concatenate(train_idx))), data.subset(np.sort(np.concatenate(valid_idx)))


def bayes_predict(spec: BlobSpec, features: np.ndarray, prior: str = "train") -> np.ndarray:
    """Bayes-optimal labels (0-based) for the mixture described by ``spec``.

    Class priors are proportional to the requested ``train`` or ``test`` counts.
    """
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if X.shape[1] != 2:
        raise DimensionError(f"blob features are 2-D, got {X.shape[1]}")
    counts = np.array([b.n_train if prior == "train" else b.n_test for b in spec.blobs], dtype=np.float64)
    log_prior = np.log(counts / counts.sum())
    log_post = np.column_stack(
        [multivariate_normal(b.mean, b.cov).logpdf(X) for b in spec.blobs]
    ) + log_prior
    return np.argmax(log_post, axis=1)
