"""Weak learning algorithms.

A weak learner receives a dataset and class weights and returns a hypothesis
that minimizes the class-weighted empirical error sum_k w_k R_{S_k}(h). The
reduction to an ordinary instance-weighted problem gives instance i of class k
the weight w_k / n_k.

Learners provided here:

- ``WeightedTreeLearner``: greedy axis-aligned tree minimizing weighted Gini
  impurity, optionally stopped at the shallowest depth that passes a gate.
- ``StumpLearner``: exact minimizer of weighted misclassification over single
  axis-aligned splits.
- ``OracleWeakLearner``: a test double that fails the theta-bound on exactly
  floor(K (1/2 - gamma)) classes per round, by construction.
"""

import hashlib
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from worstclass_boost.models.errors import ConfigError, ContractViolation
from worstclass_boost.models.schemas import (
    ClassWeights,
    Ensemble,
    Hypothesis,
    LabeledDataset,
)
from worstclass_boost.services.metrics import (
    accuracy_floor,
    class_errors_from_predictions,
    penalties_from_errors,
    require_nonempty,
    validate_theta,
    weighted_error,
)

DEFAULT_EPSILON = 0.0005
DEFAULT_MAX_DEPTH = 6
# slack for comparing a rational penalty mean against 1/2 - gamma in floating point
LEARNABILITY_TOLERANCE = 1e-12

Gate = Callable[[Hypothesis], bool]


# ---------------------------------------------------------------------------
# Weak learnability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakLearnabilityCheck:
    """Parameters of the (gamma, delta, theta) weak-learnability condition.

    ``delta`` is reporting metadata only; it never enters a computation.
    """

    theta: float
    gamma: float
    epsilon: float = DEFAULT_EPSILON
    delta: Optional[float] = None

    def __post_init__(self):
        validate_theta(self.theta)
        if not (0.0 < self.gamma < 0.5):
            raise ConfigError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def threshold(self) -> float:
        return 0.5 - self.gamma


class WeakLearnability(NamedTuple):
    satisfied: bool
    penalty_mean: float


def weak_learnability_from_penalties(penalties: Sequence[int], gamma: float) -> WeakLearnability:
    p = np.asarray(penalties)
    mean = float(np.count_nonzero(p)) / p.shape[0]
    return WeakLearnability(mean <= 0.5 - gamma + LEARNABILITY_TOLERANCE, mean)


def check_weak_learnability(
    h: Hypothesis, data: LabeledDataset, check: WeakLearnabilityCheck
) -> WeakLearnability:
    """Mean zero-one penalty over classes, and whether it is at most 1/2 - gamma."""
    errors = class_errors_from_predictions(data, h.predict_batch(data.features))
    return weak_learnability_from_penalties(penalties_from_errors(errors, check.theta), check.gamma)


def default_gamma(K: int, epsilon: float = DEFAULT_EPSILON) -> float:
    """floor(0.8 K) / K - 1/2 - epsilon."""
    if K < 2:
        raise ConfigError(f"K must be at least 2, got {K}")
    if not (0.0 < epsilon < 0.01):
        raise ConfigError(f"epsilon must lie in (0, 0.01), got {epsilon}")
    gamma = math.floor(0.8 * K) / K - 0.5 - epsilon
    if gamma <= 0.0:
        raise ConfigError(f"default gamma rule gives {gamma:.4f} for K={K}; supply gamma explicitly")
    return gamma


def instance_weights_from_class_weights(data: LabeledDataset, w: ClassWeights) -> np.ndarray:
    """Weight w_k / n_k for every instance of class k."""
    if len(w) != data.num_classes:
        raise ContractViolation(f"{len(w)} class weights for {data.num_classes} classes")
    counts = require_nonempty(data)
    return w.w[data.labels] / counts[data.labels]


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------


class WeightedTree:
    """Axis-aligned binary tree stored as parallel node arrays.

    ``feature[i] == -1`` marks a leaf. Every node, internal or not, stores the
    weighted-majority class of the instances that reached it, so ``truncate``
    can turn any depth into leaves without retraining.
    """

    def __init__(
        self,
        feature: np.ndarray,
        threshold: np.ndarray,
        left: np.ndarray,
        right: np.ndarray,
        value: np.ndarray,
        node_depth: np.ndarray,
        num_classes: int,
        n_features: int,
        seed: int = 0,
    ):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)
        self.node_depth = np.asarray(node_depth, dtype=np.int64)
        self.num_classes = int(num_classes)
        self.n_features = int(n_features)
        self.seed = int(seed)
        for array in (self.feature, self.threshold, self.left, self.right, self.value, self.node_depth):
            array.setflags(write=False)

    @property
    def depth(self) -> int:
        internal = self.node_depth[self.feature >= 0]
        return int(internal.max()) + 1 if internal.size else 0

    @property
    def n_leaves(self) -> int:
        reachable = self._reachable()
        return int(np.count_nonzero(self.feature[reachable] < 0))

    def _reachable(self) -> np.ndarray:
        seen = np.zeros(self.feature.shape[0], dtype=bool)
        stack = [0]
        while stack:
            i = stack.pop()
            seen[i] = True
            if self.feature[i] >= 0:
                stack.extend((int(self.left[i]), int(self.right[i])))
        return seen

    def truncate(self, depth: int) -> "WeightedTree":
        """Same tree with every node at ``depth`` or deeper turned into a leaf."""
        feature = self.feature.copy()
        feature[self.node_depth >= depth] = -1
        return WeightedTree(
            feature, self.threshold, self.left, self.right, self.value,
            self.node_depth, self.num_classes, self.n_features, self.seed,
        )

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ContractViolation(f"tree expects {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                break
            at = node[active]
            go_left = X[rows[active], f[active]] <= self.threshold[at]
            node[active] = np.where(go_left, self.left[at], self.right[at])
        return self.value[node]

    def predict(self, features: Sequence[float]) -> int:
        return int(self.predict_batch(np.asarray(features, dtype=np.float64).reshape(1, -1))[0])

    def to_dict(self) -> Dict[str, Any]:
        nodes = []
        for i in range(self.feature.shape[0]):
            node: Dict[str, Any] = {"class": int(self.value[i]) + 1, "depth": int(self.node_depth[i])}
            if self.feature[i] >= 0:
                node.update(
                    feature=int(self.feature[i]),
                    threshold=float(self.threshold[i]),
                    left=int(self.left[i]),
                    right=int(self.right[i]),
                )
            nodes.append(node)
        return {
            "type": "tree",
            "num_classes": self.num_classes,
            "n_features": self.n_features,
            "seed": self.seed,
            "nodes": nodes,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WeightedTree":
        nodes = data["nodes"]
        return cls(
            feature=[n.get("feature", -1) for n in nodes],
            threshold=[n.get("threshold", 0.0) for n in nodes],
            left=[n.get("left", -1) for n in nodes],
            right=[n.get("right", -1) for n in nodes],
            value=[n["class"] - 1 for n in nodes],
            node_depth=[n.get("depth", 0) for n in nodes],
            num_classes=data["num_classes"],
            n_features=data["n_features"],
            seed=data.get("seed", 0),
        )


class LookupHypothesis:
    """Predicts from a table keyed by exact feature vectors; unseen rows get ``default``."""

    def __init__(self, features: np.ndarray, predictions: np.ndarray, num_classes: int, default: int = 0):
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(features, dtype=np.float64)))
        self.num_classes = int(num_classes)
        self.n_features = int(X.shape[1])
        self.default = int(default)
        self._table = {row.tobytes(): int(p) for row, p in zip(X, np.asarray(predictions).reshape(-1))}

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(features, dtype=np.float64)))
        return np.fromiter(
            (self._table.get(row.tobytes(), self.default) for row in X), dtype=np.int64, count=X.shape[0]
        )

    def predict(self, features: Sequence[float]) -> int:
        return int(self.predict_batch(np.asarray(features, dtype=np.float64).reshape(1, -1))[0])

    def to_dict(self) -> Dict[str, Any]:
        rows = [np.frombuffer(key, dtype=np.float64).tolist() for key in self._table]
        return {
            "type": "lookup",
            "num_classes": self.num_classes,
            "n_features": self.n_features,
            "default": self.default + 1,
            "features": rows,
            "classes": [v + 1 for v in self._table.values()],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LookupHypothesis":
        features = np.asarray(data["features"], dtype=np.float64).reshape(-1, data["n_features"])
        return cls(features, np.asarray(data["classes"]) - 1, data["num_classes"], data["default"] - 1)


class ConstantHypothesis:
    """Predicts the same class everywhere."""

    def __init__(self, label: int, num_classes: int, n_features: int):
        self.label = int(label)
        self.num_classes = int(num_classes)
        self.n_features = int(n_features)

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return np.full(X.shape[0], self.label, dtype=np.int64)

    def predict(self, features: Sequence[float]) -> int:
        return self.label

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "constant",
            "num_classes": self.num_classes,
            "n_features": self.n_features,
            "class": self.label + 1,
        }


def hypothesis_from_dict(data: Dict[str, Any]) -> Hypothesis:
    """Rebuild any serialized hypothesis or ensemble."""
    kind = data.get("type")
    if kind == "tree":
        return WeightedTree.from_dict(data)
    if kind == "lookup":
        return LookupHypothesis.from_dict(data)
    if kind == "constant":
        return ConstantHypothesis(data["class"] - 1, data["num_classes"], data["n_features"])
    if kind == "ensemble":
        return Ensemble(
            members=tuple(hypothesis_from_dict(m) for m in data["members"]),
            num_classes=data["num_classes"],
            n_features=data["n_features"],
        )
    raise ContractViolation(f"unknown hypothesis type {kind!r}")


# ---------------------------------------------------------------------------
# Tree growing
# ---------------------------------------------------------------------------


def _weighted_gini(class_totals: np.ndarray) -> np.ndarray:
    """Total weight times Gini impurity, row-wise; zero for empty rows."""
    s = class_totals.sum(axis=-1)
    squares = (class_totals**2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0, s - squares / np.where(s > 0, s, 1.0), 0.0)


def _midpoint(a: float, b: float) -> float:
    mid = a + (b - a) / 2.0
    return a if mid >= b else mid


def _best_split(X: np.ndarray, W: np.ndarray, criterion: str):
    """Best (feature, threshold, score) for one node, or None if no split exists.

    Thresholds are midpoints between consecutive distinct values; ties go to the
    lowest feature index, then the lowest threshold.
    """
    totals = W.sum(axis=0)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cuts = np.flatnonzero(xs[:-1] < xs[1:])
        if cuts.size == 0:
            continue
        left = np.cumsum(W[order], axis=0)[cuts]
        right = totals - left
        if criterion == "gini":
            scores = _weighted_gini(left) + _weighted_gini(right)
        else:
            scores = (left.sum(axis=1) - left.max(axis=1)) + (right.sum(axis=1) - right.max(axis=1))
        i = int(np.argmin(scores))
        score = float(scores[i])
        if best is None or score < best[2] - 1e-12 * max(1.0, abs(best[2])):
            best = (f, _midpoint(float(xs[cuts[i]]), float(xs[cuts[i] + 1])), score)
    return best


def grow_weighted_tree(
    data: LabeledDataset,
    instance_weights: np.ndarray,
    max_depth: int = DEFAULT_MAX_DEPTH,
    seed: int = 0,
    criterion: str = "gini",
    root_criterion: Optional[str] = None,
) -> WeightedTree:
    """Greedy tree on explicit instance weights.

    A node becomes a leaf at ``max_depth``, when its weight is zero or pure, or
    when all its feature vectors coincide. Zero-gain splits are allowed, which
    is what lets depth 2 solve XOR. ``root_criterion`` overrides ``criterion``
    for the root split only.
    """
    if max_depth < 1:
        raise ConfigError(f"max_depth must be at least 1, got {max_depth}")
    sw = np.asarray(instance_weights, dtype=np.float64).reshape(-1)
    if sw.shape[0] != data.n:
        raise ContractViolation(f"{sw.shape[0]} instance weights for {data.n} instances")
    if (sw < 0).any():
        raise ContractViolation("instance weights must be non-negative")
    K = data.num_classes
    onehot = np.zeros((data.n, K))
    onehot[np.arange(data.n), data.labels] = 1.0
    W_all = onehot * sw[:, None]

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[int] = []
    node_depth: List[int] = []

    def new_node(depth: int, totals: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(int(np.argmax(totals)))
        node_depth.append(depth)
        return len(feature) - 1

    root_idx = np.arange(data.n)
    stack = [(new_node(0, W_all.sum(axis=0)), root_idx)]
    while stack:
        node, idx = stack.pop()
        depth = node_depth[node]
        W = W_all[idx]
        totals = W.sum(axis=0)
        if depth >= max_depth or totals.sum() <= 0 or _weighted_gini(totals) <= 1e-15:
            continue
        split = _best_split(data.features[idx], W, root_criterion if depth == 0 and root_criterion else criterion)
        if split is None:
            continue
        f, thr, _ = split
        goes_left = data.features[idx, f] <= thr
        left_idx, right_idx = idx[goes_left], idx[~goes_left]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(depth + 1, W_all[left_idx].sum(axis=0))
        right[node] = new_node(depth + 1, W_all[right_idx].sum(axis=0))
        stack.append((right[node], right_idx))
        stack.append((left[node], left_idx))

    return WeightedTree(feature, threshold, left, right, value, node_depth, K, data.dim, seed)


def train_weighted_stump(data: LabeledDataset, instance_weights: np.ndarray, seed: int = 0) -> WeightedTree:
    """Single split minimizing weighted misclassification exactly."""
    return grow_weighted_tree(data, instance_weights, max_depth=1, seed=seed, criterion="error")


def fit_weighted_tree(
    data: LabeledDataset, instance_weights: np.ndarray, max_depth: int = DEFAULT_MAX_DEPTH, seed: int = 0
) -> WeightedTree:
    """Greedy Gini tree whose weighted error is never above the best stump's.

    Gini can pick a root split that misclassifies more weight than the exact
    stump. In that case a second tree is grown under the stump's root split
    and the one with the smaller weighted error is kept (ties keep the Gini
    tree). Splitting a node never raises weighted error, so the stump-rooted
    tree is at most as bad as the stump.
    """
    sw = np.asarray(instance_weights, dtype=np.float64).reshape(-1)
    tree = grow_weighted_tree(data, sw, max_depth, seed)
    stump = train_weighted_stump(data, sw, seed)
    if tree.feature[0] == stump.feature[0] and tree.threshold[0] == stump.threshold[0]:
        return tree
    rooted = grow_weighted_tree(data, sw, max_depth, seed, root_criterion="error")
    if weighted_error(data, rooted.predict_batch(data.features), sw) < weighted_error(
        data, tree.predict_batch(data.features), sw
    ):
        return rooted
    return tree


def train_weighted_tree(
    data: LabeledDataset, w: ClassWeights, max_depth: int = DEFAULT_MAX_DEPTH, seed: int = 0
) -> WeightedTree:
    """Tree minimizing weighted Gini under the class-weight reduction w_k / n_k."""
    return fit_weighted_tree(data, instance_weights_from_class_weights(data, w), max_depth, seed)


# ---------------------------------------------------------------------------
# Learners
# ---------------------------------------------------------------------------


class WeakLearner:
    """Contract shared by all weak learners.

    ``train`` realizes the class-weighted objective; ``train_weighted`` takes
    explicit instance weights (used by the average-error booster). ``accept``
    is an optional gate a learner may use to stop early.
    """

    name = "weak_learner"

    def train(self, data: LabeledDataset, class_weights: ClassWeights, accept: Optional[Gate] = None) -> Hypothesis:
        return self.train_weighted(data, instance_weights_from_class_weights(data, class_weights), accept)

    def train_weighted(
        self, data: LabeledDataset, instance_weights: np.ndarray, accept: Optional[Gate] = None
    ) -> Hypothesis:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name}


class WeightedTreeLearner(WeakLearner):
    """Greedy Gini tree grown to ``max_depth``.

    With ``early_stop`` the shallowest truncation that passes the round gate is
    returned instead. Such members may clear theta on the hardest class by a
    hair, and their majority vote can then miss the 1 - theta bound.
    """

    name = "weighted_tree"

    def __init__(self, max_depth: int = DEFAULT_MAX_DEPTH, early_stop: bool = False, seed: int = 0):
        if max_depth < 1:
            raise ConfigError(f"max_depth must be at least 1, got {max_depth}")
        self.max_depth = max_depth
        self.early_stop = early_stop
        self.seed = seed

    def train_weighted(self, data, instance_weights, accept=None):
        full = fit_weighted_tree(data, instance_weights, self.max_depth, self.seed)
        if not self.early_stop or accept is None:
            return full
        for depth in range(1, full.depth + 1):
            candidate = full.truncate(depth)
            if accept(candidate):
                return candidate
        return full

    def describe(self):
        return {"name": self.name, "max_depth": self.max_depth, "early_stop": self.early_stop, "seed": self.seed}


class StumpLearner(WeakLearner):
    name = "stump"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def train_weighted(self, data, instance_weights, accept=None):
        return train_weighted_stump(data, instance_weights, self.seed)


class OracleWeakLearner(WeakLearner):
    """Synthetic learner that satisfies weak learnability by construction.

    Each call fails the theta-bound on the floor(K (1/2 - gamma)) classes with
    the smallest current weights (ties to the lowest index) and classifies every
    other class perfectly. A failing class gets a random error in
    [1 - theta, 1], with wrong labels drawn uniformly from the other classes.
    Randomness is derived from ``seed`` and the weights, so calls are pure.
    """

    name = "oracle"

    def __init__(self, gamma: float, theta: float, seed: int = 0):
        if not (0.0 < gamma < 0.5):
            raise ConfigError(f"gamma must lie in (0, 1/2), got {gamma}")
        self.gamma = gamma
        self.theta = validate_theta(theta)
        self.seed = seed

    def failing_count(self, K: int) -> int:
        return int(math.floor(K * (0.5 - self.gamma) + 1e-9))

    def failing_classes(self, class_weights: ClassWeights) -> np.ndarray:
        w = class_weights.w
        # rounding keeps classes with mathematically equal weights tied
        order = np.lexsort((np.arange(w.shape[0]), np.round(w, 12)))
        return np.sort(order[: self.failing_count(w.shape[0])])

    def _rng(self, class_weights: ClassWeights) -> np.random.Generator:
        digest = hashlib.sha256(class_weights.w.tobytes()).digest()
        return np.random.default_rng([self.seed, int.from_bytes(digest[:8], "little")])

    def train(self, data, class_weights, accept=None):
        K = data.num_classes
        if len(class_weights) != K:
            raise ContractViolation(f"{len(class_weights)} class weights for {K} classes")
        counts = require_nonempty(data)
        if np.unique(data.features, axis=0).shape[0] != data.n:
            raise ContractViolation("the oracle learner needs distinct feature vectors; the sample has duplicates")
        rng = self._rng(class_weights)
        predictions = data.labels.copy()
        floor = accuracy_floor(self.theta)
        for k in self.failing_classes(class_weights):
            members = np.flatnonzero(data.labels == k)
            n_k = int(counts[k])
            needed = min(n_k, max(0, math.ceil(floor * n_k - 1e-9)))
            while needed < n_k and needed / n_k < floor:
                needed += 1
            wrong = int(rng.integers(needed, n_k + 1))
            chosen = rng.choice(members, size=wrong, replace=False)
            predictions[chosen] = (k + rng.integers(1, K, size=wrong)) % K
        return LookupHypothesis(data.features, predictions, K)

    def train_weighted(self, data, instance_weights, accept=None):
        raise ContractViolation("the oracle learner only supports class weights")

    def describe(self):
        return {"name": self.name, "gamma": self.gamma, "theta": self.theta, "seed": self.seed}

