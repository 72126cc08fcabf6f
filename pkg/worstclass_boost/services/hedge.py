"""Hedge (exponential weights) over class weights.

The instance-weighting player keeps a point on the simplex and, after each
round, multiplies every coordinate by exp(-eta * r_k) and renormalizes. Classes
that already meet the accuracy floor (r_k = 1) lose weight, so the weight
drifts toward failing classes.

States are immutable values: ``hedge_update`` returns a new state, and the
regret ledger is a persistent list so appending is O(1).
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from worstclass_boost.models.errors import ConfigError, ContractViolation
from worstclass_boost.models.schemas import ClassWeights, FeedbackVector

ETA_RULES = ("classes", "samples")


@dataclass(frozen=True)
class LedgerEntry:
    """Weights played in one round and the feedback received for them."""

    weights: ClassWeights
    feedback: FeedbackVector


@dataclass(frozen=True, eq=False)
class RegretLedger:
    """History of (weights, feedback) pairs, one per round played."""

    parent: Optional["RegretLedger"] = None
    entry: Optional[LedgerEntry] = None
    length: int = 0

    def append(self, weights: ClassWeights, feedback: FeedbackVector) -> "RegretLedger":
        return RegretLedger(parent=self, entry=LedgerEntry(weights, feedback), length=self.length + 1)

    def __len__(self) -> int:
        return self.length

    def __iter__(self) -> Iterator[LedgerEntry]:
        return iter(self.entries)

    @property
    def entries(self) -> Tuple[LedgerEntry, ...]:
        chain = []
        node: Optional[RegretLedger] = self
        while node is not None and node.entry is not None:
            chain.append(node.entry)
            node = node.parent
        return tuple(reversed(chain))

    def weight_matrix(self) -> np.ndarray:
        """(rounds, K) matrix of played weights."""
        entries = self.entries
        if not entries:
            return np.zeros((0, 0))
        return np.stack([e.weights.w for e in entries])

    def feedback_matrix(self) -> np.ndarray:
        entries = self.entries
        if not entries:
            return np.zeros((0, 0), dtype=np.int8)
        return np.stack([e.feedback.r for e in entries])


@dataclass(frozen=True, eq=False)
class HedgeState:
    """Current weights, learning rate, round counter and running sums."""

    weights: ClassWeights
    eta: float
    round: int = 0
    cumulative_feedback: np.ndarray = field(default=None)
    cumulative_gain: float = 0.0
    ledger: RegretLedger = field(default_factory=RegretLedger)

    def __post_init__(self):
        if self.cumulative_feedback is None:
            object.__setattr__(self, "cumulative_feedback", np.zeros(len(self.weights)))

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def regret(self) -> float:
        """Regret so far, from the running sums (no ledger walk)."""
        if self.round == 0:
            return 0.0
        return self.cumulative_gain - float(self.cumulative_feedback.min())


def init_weights(K: int, eta: float = 1.0) -> HedgeState:
    """Uniform weights 1/K at round 0."""
    if K < 2:
        raise ConfigError(f"Hedge needs at least 2 coordinates, got K={K}")
    if not (eta >= 0.0 and math.isfinite(eta)):
        raise ConfigError(f"eta must be finite and non-negative, got {eta}")
    return HedgeState(weights=ClassWeights.uniform(K), eta=float(eta))


def default_eta(K: float, T: int, n: Optional[int] = None, rule: str = "classes") -> float:
    """Learning rate sqrt(8 ln(dim) / T).

    ``rule="classes"`` uses the simplex dimension ``K``; ``rule="samples"`` uses
    the sample size ``n`` as literally written in the algorithm's inputs.
    """
    if rule not in ETA_RULES:
        raise ConfigError(f"unknown eta rule {rule!r}; expected one of {ETA_RULES}")
    if T < 1:
        raise ConfigError(f"T must be at least 1, got {T}")
    dim = K
    if rule == "samples":
        if n is None:
            raise ConfigError("eta rule 'samples' needs the sample size n")
        dim = n
    if dim < 2:
        raise ConfigError(f"eta needs a dimension of at least 2, got {dim}")
    return math.sqrt(8.0 * math.log(dim) / T)


def hedge_update(state: HedgeState, r: Union[FeedbackVector, Sequence[int], np.ndarray]) -> HedgeState:
    """One Hedge step: w'_k proportional to w_k * exp(-eta * r_k)."""
    feedback = r if isinstance(r, FeedbackVector) else FeedbackVector(np.asarray(r))
    if len(feedback) != state.size:
        raise ContractViolation(f"feedback has length {len(feedback)}, weights have {state.size}")
    w = state.weights.w
    exponent = -state.eta * feedback.r.astype(np.float64)
    # shift by the max exponent so the largest factor is exactly 1
    scaled = w * np.exp(exponent - exponent.max())
    new_weights = ClassWeights(scaled / scaled.sum())
    return HedgeState(
        weights=new_weights,
        eta=state.eta,
        round=state.round + 1,
        cumulative_feedback=state.cumulative_feedback + feedback.r,
        cumulative_gain=state.cumulative_gain + float(np.dot(w, feedback.r)),
        ledger=state.ledger.append(state.weights, feedback),
    )


def regret(ledger: RegretLedger) -> float:
    """sum_t w_t . r_t minus the best fixed vertex in hindsight."""
    if len(ledger) == 0:
        raise ContractViolation("regret of an empty ledger is undefined")
    W = ledger.weight_matrix()
    R = ledger.feedback_matrix().astype(np.float64)
    gained = float(np.einsum("tk,tk->", W, R))
    return gained - float(R.sum(axis=0).min())


def regret_bound(K: float, T: int) -> float:
    """Hedge guarantee sqrt(T ln K / 2) under the default learning rate."""
    return math.sqrt(T * math.log(K) / 2.0)


def sufficient_rounds(K: int, gamma: float) -> int:
    """Smallest T with sqrt(T ln K / 2) <= gamma T / 2, i.e. ceil(2 ln K / gamma^2)."""
    if not (0.0 < gamma < 0.5):
        raise ConfigError(f"gamma must lie in (0, 1/2), got {gamma}")
    if K < 2:
        raise ConfigError(f"K must be at least 2, got {K}")
    return max(1, math.ceil(2.0 * math.log(K) / gamma**2 - 1e-9))


def batch_regret(feedback: np.ndarray, eta: float) -> np.ndarray:
    """Regret of Hedge from uniform weights on a batch of feedback sequences.

    ``feedback`` has shape (..., T, K). Uses the closed form
    w_t proportional to exp(-eta * sum_{s<t} r_s), which equals the iterated update.
    """
    R = np.asarray(feedback, dtype=np.float64)
    if R.ndim < 2:
        raise ContractViolation("feedback batch must have shape (..., T, K)")
    seen = np.cumsum(R, axis=-2) - R
    logits = -eta * seen
    logits -= logits.max(axis=-1, keepdims=True)
    W = np.exp(logits)
    W /= W.sum(axis=-1, keepdims=True)
    gained = (W * R).sum(axis=(-2, -1))
    return gained - R.sum(axis=-2).min(axis=-1)


def time_averaged_weights(ledger: RegretLedger) -> np.ndarray:
    if len(ledger) == 0:
        raise ContractViolation("ledger is empty")
    return ledger.weight_matrix().mean(axis=0)


def ledger_frame(ledger: RegretLedger) -> pd.DataFrame:
    """Long-format trajectory with columns round, k, weight, feedback (1-based)."""
    W = ledger.weight_matrix()
    R = ledger.feedback_matrix()
    rounds, K = W.shape
    return pd.DataFrame(
        {
            "round": np.repeat(np.arange(1, rounds + 1), K),
            "k": np.tile(np.arange(1, K + 1), rounds),
            "weight": W.reshape(-1),
            "feedback": R.reshape(-1).astype(np.int64),
        }
    )


def export_ledger_csv(ledger: RegretLedger, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ledger_frame(ledger).to_csv(path, index=False, float_format="%.17g")
    return path
