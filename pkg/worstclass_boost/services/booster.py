"""Boosting drivers.

``run_worstclass_boost`` plays Hedge over the K class weights against a weak
learner: each round the learner is trained on the class-weighted sample, every
class whose error stays below 1 - theta reports success, and successful classes
lose weight. The output is the unweighted majority vote of the accepted
hypotheses, whose worst-class training error is below 1 - theta whenever the
learner stayed weakly learnable and the regret stayed within gamma T / 2.

``run_average_boost`` is the standard baseline: the same game over n instance
weights with per-instance correctness as feedback.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from worstclass_boost.log_system.unified_logger import UnifiedLogger
from worstclass_boost.models.errors import ConfigError, ContractViolation, NoWeakHypothesis
from worstclass_boost.models.schemas import (
    ClassErrorReport,
    ClassWeights,
    Ensemble,
    FeedbackVector,
    Hypothesis,
    LabeledDataset,
)
from worstclass_boost.services.hedge import (
    ETA_RULES,
    HedgeState,
    RegretLedger,
    default_eta,
    hedge_update,
    init_weights,
    sufficient_rounds,
)
from worstclass_boost.services.metrics import (
    class_errors_from_predictions,
    error_report_from_predictions,
    penalties_from_errors,
    require_nonempty,
    validate_theta,
    weighted_error,
)
from worstclass_boost.services.weak_learners import (
    DEFAULT_EPSILON,
    WeakLearnabilityCheck,
    WeakLearner,
    default_gamma,
    hypothesis_from_dict,
    weak_learnability_from_penalties,
)

DEFAULT_PATIENCE = 100
STALL_TOLERANCE = 1e-12
METHODS = ("worstclass_boost", "average_boost")


class StopReason(str, Enum):
    COMPLETED_T = "completed_T"
    WEAK_LEARNABILITY_FAILED = "weak_learnability_failed"
    STALLED = "stalled"


class ReportOutcome(str, Enum):
    NOT_APPLICABLE = "not_applicable"
    STOPPED_EARLY = "stopped_early"
    CONCLUSION_HOLDS = "conclusion_holds"
    CONCLUSION_FAILS = "conclusion_fails"


@dataclass(frozen=True)
class BoostConfig:
    """Parameters of one boosting run.

    ``gamma=None`` resolves through ``default_gamma(K, epsilon)``;
    ``max_rounds=None`` runs the sufficient number of rounds; ``eta="auto"``
    uses sqrt(8 ln(dim) / T); ``patience=None`` disables the stall rule.
    ``delta`` is recorded for reports only.
    """

    theta: float
    gamma: Optional[float] = None
    epsilon: float = DEFAULT_EPSILON
    max_rounds: Optional[int] = None
    eta: Union[str, float] = "auto"
    eta_rule: str = "classes"
    patience: Optional[int] = DEFAULT_PATIENCE
    seed: int = 0
    delta: Optional[float] = None

    def __post_init__(self):
        validate_theta(self.theta)
        if self.gamma is not None and not (0.0 < self.gamma < 0.5):
            raise ConfigError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if not (0.0 < self.epsilon < 0.01):
            raise ConfigError(f"epsilon must lie in (0, 0.01), got {self.epsilon}")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ConfigError(f"max_rounds must be positive, got {self.max_rounds}")
        if isinstance(self.eta, str):
            if self.eta != "auto":
                raise ConfigError(f"eta must be a positive number or 'auto', got {self.eta!r}")
        elif not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.eta_rule not in ETA_RULES:
            raise ConfigError(f"unknown eta rule {self.eta_rule!r}; expected one of {ETA_RULES}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"patience must be positive, got {self.patience}")
        if self.delta is not None and not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")

    def resolve_gamma(self, K: int) -> float:
        return self.gamma if self.gamma is not None else default_gamma(K, self.epsilon)

    def resolve_rounds(self, dim: int, gamma: float) -> int:
        T = sufficient_rounds(dim, gamma)
        return T if self.max_rounds is None else min(T, self.max_rounds)

    def resolve_eta(self, dim: int, T: int, n: Optional[int] = None) -> float:
        if self.eta == "auto":
            return default_eta(dim, T, n=n, rule=self.eta_rule)
        return float(self.eta)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta": self.theta,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "max_rounds": self.max_rounds,
            "eta": self.eta,
            "eta_rule": self.eta_rule,
            "patience": self.patience,
            "seed": self.seed,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoostConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class RoundRecord:
    """What happened in one round.

    ``weights`` and ``feedback`` are class-level: the Hedge weights and
    success indicators for the worst-class booster, and the per-class weight
    mass and theta-success of the hypothesis for the average booster.
    """

    round: int
    weights: np.ndarray
    hypothesis_id: str
    feedback: np.ndarray
    class_errors: np.ndarray
    gain: float
    regret: float
    weak_learnable: bool
    penalty_mean: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round": self.round,
            "weights": self.weights.tolist(),
            "hypothesis_id": self.hypothesis_id,
            "feedback": self.feedback.astype(int).tolist(),
            "class_errors": self.class_errors.tolist(),
            "gain": self.gain,
            "regret": self.regret,
            "weak_learnable": self.weak_learnable,
            "penalty_mean": self.penalty_mean,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RoundRecord":
        return cls(
            round=int(data["round"]),
            weights=np.asarray(data["weights"], dtype=np.float64),
            hypothesis_id=data["hypothesis_id"],
            feedback=np.asarray(data["feedback"], dtype=np.int8),
            class_errors=np.asarray(data["class_errors"], dtype=np.float64),
            gain=float(data["gain"]),
            regret=float(data["regret"]),
            weak_learnable=bool(data["weak_learnable"]),
            penalty_mean=float(data["penalty_mean"]),
        )


@dataclass(frozen=True, eq=False)
class RoundLog:
    records: Tuple[RoundRecord, ...]
    num_classes: int
    theta: float
    gamma: float
    eta: float
    planned_rounds: int
    stop_reason: StopReason
    final_report: ClassErrorReport

    def __len__(self) -> int:
        return len(self.records)

    @property
    def accepted_rounds(self) -> int:
        return sum(1 for r in self.records if r.weak_learnable)

    def class_ledger(self) -> RegretLedger:
        """Class-level (weights, feedback) trajectory of the accepted rounds."""
        ledger = RegretLedger()
        for record in self.records:
            if record.weak_learnable:
                ledger = ledger.append(ClassWeights(record.weights), FeedbackVector(record.feedback))
        return ledger

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_classes": self.num_classes,
            "theta": self.theta,
            "gamma": self.gamma,
            "eta": self.eta,
            "planned_rounds": self.planned_rounds,
            "stop_reason": self.stop_reason.value,
            "final_report": self.final_report.to_dict(),
            "rounds": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RoundLog":
        return cls(
            records=tuple(RoundRecord.from_dict(r) for r in data["rounds"]),
            num_classes=int(data["num_classes"]),
            theta=float(data["theta"]),
            gamma=float(data["gamma"]),
            eta=float(data["eta"]),
            planned_rounds=int(data["planned_rounds"]),
            stop_reason=StopReason(data["stop_reason"]),
            final_report=ClassErrorReport.from_dict(data["final_report"]),
        )


@dataclass(frozen=True, eq=False)
class BoostResult:
    method: str
    config: BoostConfig
    ensemble: Ensemble
    log: RoundLog
    ledger: RegretLedger = field(default_factory=RegretLedger)
    learner: Dict[str, Any] = field(default_factory=dict)

    @property
    def stop_reason(self) -> StopReason:
        return self.log.stop_reason

    @property
    def final_report(self) -> ClassErrorReport:
        return self.log.final_report

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "config": self.config.to_dict(),
            "learner": self.learner,
            "stop_reason": self.stop_reason.value,
            "final_report": self.final_report.to_dict(),
            "log": self.log.to_dict(),
            "ensemble": self.ensemble.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoostResult":
        log = RoundLog.from_dict(data["log"])
        return cls(
            method=data["method"],
            config=BoostConfig.from_dict(data["config"]),
            ensemble=hypothesis_from_dict(data["ensemble"]),
            log=log,
            ledger=log.class_ledger() if data["method"] == "worstclass_boost" else RegretLedger(),
            learner=data.get("learner", {}),
        )


class _StallDetector:
    """Counts consecutive rounds whose gain w_t . r_t did not move."""

    def __init__(self, patience: Optional[int]):
        self.patience = patience
        self.previous: Optional[float] = None
        self.unchanged = 0

    def observe(self, gain: float) -> bool:
        if self.previous is not None and abs(gain - self.previous) <= STALL_TOLERANCE:
            self.unchanged += 1
        else:
            self.unchanged = 0
        self.previous = gain
        return self.patience is not None and self.unchanged >= self.patience


def _finish(
    data: LabeledDataset,
    members: List[Hypothesis],
    records: List[RoundRecord],
    gamma: float,
    eta: float,
    T: int,
    stop: StopReason,
    config: BoostConfig,
) -> Tuple[Ensemble, RoundLog]:
    if not members:
        raise NoWeakHypothesis(
            "no weak hypothesis passed the weak-learnability check",
            rounds=len(records),
            gamma=gamma,
        )
    ensemble = Ensemble(tuple(members), data.num_classes, data.dim)
    report = error_report_from_predictions(data, ensemble.predict_batch(data.features))
    log = RoundLog(tuple(records), data.num_classes, config.theta, gamma, eta, T, stop, report)
    return ensemble, log


def run_worstclass_boost(data: LabeledDataset, learner: WeakLearner, config: BoostConfig) -> BoostResult:
    """Worst-class boosting with Hedge over class weights.

    Each round: train h_t on (data, w_t); r_{k,t} = 1 iff class k's error is
    below 1 - theta (exactly the negation of the zero-one penalty); if the
    penalty mean exceeds 1/2 - gamma the run stops with the ensemble of
    h_1..h_{t-1}, otherwise h_t joins the ensemble and the weights update.

    Raises:
        NoWeakHypothesis: If the first round already fails the check
        EmptyClass: If some class has no training instance
    """
    logger = UnifiedLogger.get_logger(__name__)
    K = data.num_classes
    require_nonempty(data)
    gamma = config.resolve_gamma(K)
    check = WeakLearnabilityCheck(config.theta, gamma, config.epsilon, config.delta)
    T = config.resolve_rounds(K, gamma)
    eta = config.resolve_eta(K, T, n=data.n)
    state: HedgeState = init_weights(K, eta)

    logger.info(
        f"worst-class boosting: K={K}, n={data.n}, theta={config.theta}, gamma={gamma:.6g}, T={T}, eta={eta:.6g}",
        log_type="run",
        method="worstclass_boost",
        seed=config.seed,
        theta=config.theta,
    )

    accept = lambda h: weak_learnability_from_penalties(  # noqa: E731
        penalties_from_errors(class_errors_from_predictions(data, h.predict_batch(data.features)), config.theta),
        gamma,
    ).satisfied

    members: List[Hypothesis] = []
    records: List[RoundRecord] = []
    stall = _StallDetector(config.patience)
    stop = StopReason.COMPLETED_T

    for t in range(1, T + 1):
        h = learner.train(data, state.weights, accept=accept)
        errors = class_errors_from_predictions(data, h.predict_batch(data.features))
        penalties = penalties_from_errors(errors, check.theta)
        feedback = (1 - penalties).astype(np.int8)
        learnability = weak_learnability_from_penalties(penalties, gamma)
        gain = float(np.dot(state.weights.w, feedback))

        if not learnability.satisfied:
            records.append(
                RoundRecord(t, state.weights.w, f"h{t}", feedback, errors, gain, state.regret, False,
                            learnability.penalty_mean)
            )
            logger.info(
                f"round {t}: penalty mean {learnability.penalty_mean:.4f} exceeds {check.threshold:.4f}; stopping",
                log_type="round",
                round=t,
                method="worstclass_boost",
            )
            stop = StopReason.WEAK_LEARNABILITY_FAILED
            break

        played = state.weights.w
        state = hedge_update(state, feedback)
        members.append(h)
        records.append(
            RoundRecord(t, played, f"h{t}", feedback, errors, gain, state.regret, True, learnability.penalty_mean)
        )
        logger.debug(
            f"round {t}: gain={gain:.6f} regret={state.regret:.6f} penalty_mean={learnability.penalty_mean:.4f}",
            log_type="round",
            round=t,
            method="worstclass_boost",
        )

        if stall.observe(gain):
            stop = StopReason.STALLED
            break

    ensemble, log = _finish(data, members, records, gamma, eta, T, stop, config)
    logger.info(
        f"worst-class boosting finished after {len(records)} rounds ({stop.value}); "
        f"worst-class training error {log.final_report.worst_class_error:.4f}",
        log_type="run",
        method="worstclass_boost",
        status="success",
    )
    return BoostResult("worstclass_boost", config, ensemble, log, state.ledger, learner.describe())


def run_average_boost(data: LabeledDataset, learner: WeakLearner, config: BoostConfig) -> BoostResult:
    """Average-error boosting with Hedge over instance weights.

    Feedback is per-instance correctness; a hypothesis is accepted while its
    weighted error is below 1/2 - gamma. Rounds default to
    ``sufficient_rounds(n, gamma)`` and eta uses ln n.

    Raises:
        NoWeakHypothesis: If the first round already fails the check
    """
    logger = UnifiedLogger.get_logger(__name__)
    K, n = data.num_classes, data.n
    require_nonempty(data)
    if n < 2:
        raise ContractViolation("average boosting needs at least 2 instances")
    gamma = config.resolve_gamma(K)
    T = config.resolve_rounds(n, gamma)
    eta = config.resolve_eta(n, T, n=n)
    state: HedgeState = init_weights(n, eta)
    threshold = 0.5 - gamma

    logger.info(
        f"average boosting: K={K}, n={n}, gamma={gamma:.6g}, T={T}, eta={eta:.6g}",
        log_type="run",
        method="average_boost",
        seed=config.seed,
    )

    accept = lambda h: weighted_error(data, h.predict_batch(data.features), state.weights.w) < threshold  # noqa: E731

    members: List[Hypothesis] = []
    records: List[RoundRecord] = []
    stall = _StallDetector(config.patience)
    stop = StopReason.COMPLETED_T

    for t in range(1, T + 1):
        w = state.weights.w
        h = learner.train_weighted(data, w, accept=accept)
        predictions = h.predict_batch(data.features)
        correct = (predictions == data.labels).astype(np.int8)
        errors = class_errors_from_predictions(data, predictions)
        penalties = penalties_from_errors(errors, config.theta)
        class_mass = np.bincount(data.labels, weights=w, minlength=K)
        err = float(np.dot(w, 1 - correct))
        gain = 1.0 - err
        accepted = err < threshold
        record = RoundRecord(
            t, class_mass, f"h{t}", (1 - penalties).astype(np.int8), errors, gain,
            state.regret, accepted, float(penalties.mean()),
        )

        if not accepted:
            records.append(record)
            logger.info(
                f"round {t}: weighted error {err:.4f} not below {threshold:.4f}; stopping",
                log_type="round",
                round=t,
                method="average_boost",
            )
            stop = StopReason.WEAK_LEARNABILITY_FAILED
            break

        state = hedge_update(state, correct)
        members.append(h)
        records.append(replace(record, regret=state.regret))
        logger.debug(
            f"round {t}: weighted error={err:.6f} regret={state.regret:.6f}",
            log_type="round",
            round=t,
            method="average_boost",
        )

        if stall.observe(gain):
            stop = StopReason.STALLED
            break

    ensemble, log = _finish(data, members, records, gamma, eta, T, stop, config)
    logger.info(
        f"average boosting finished after {len(records)} rounds ({stop.value}); "
        f"average training error {log.final_report.average_error:.4f}",
        log_type="run",
        method="average_boost",
        status="success",
    )
    return BoostResult("average_boost", config, ensemble, log, state.ledger, learner.describe())


# ---------------------------------------------------------------------------
# Guarantees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Report:
    """Whether the worst-class guarantee's hypotheses held on a finished run."""

    slack: Tuple[float, ...]
    first_violation: Optional[int]
    regret: float
    regret_budget: float
    weak_learnability_held: bool
    regret_held: bool
    worst_class_error: float
    bound: float
    conclusion_holds: Optional[bool]
    outcome: ReportOutcome
    message: str
    delta: Optional[float] = None
    surrogate_note: str = (
        "weak learnability is checked on the realized class penalties of each round, "
        "an empirical surrogate for the condition over all class reweightings"
    )

    @property
    def preconditions_held(self) -> bool:
        return self.weak_learnability_held and self.regret_held

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slack": list(self.slack),
            "first_violation": self.first_violation,
            "regret": self.regret,
            "regret_budget": self.regret_budget,
            "weak_learnability_held": self.weak_learnability_held,
            "regret_held": self.regret_held,
            "preconditions_held": self.preconditions_held,
            "worst_class_error": self.worst_class_error,
            "bound": self.bound,
            "conclusion_holds": self.conclusion_holds,
            "outcome": self.outcome.value,
            "message": self.message,
            "delta": self.delta,
            "surrogate_note": self.surrogate_note,
        }


def theorem1_precondition_report(log: RoundLog, config: BoostConfig) -> Theorem1Report:
    """Check weak learnability per round and regret <= gamma T / 2.

    T is the number of accepted rounds. When both held and the run completed
    all planned rounds, the measured worst-class training error is compared
    with 1 - theta.
    """
    threshold = 0.5 - log.gamma
    slack = tuple(threshold - r.penalty_mean for r in log.records)
    first_violation = next((r.round for r in log.records if not r.weak_learnable), None)
    accepted = [r for r in log.records if r.weak_learnable]
    T = len(accepted)
    realized_regret = accepted[-1].regret if accepted else 0.0
    budget = log.gamma * T / 2.0
    wl_held = first_violation is None
    regret_held = realized_regret <= budget + 1e-12
    worst = log.final_report.worst_class_error
    bound = 1.0 - log.theta

    conclusion: Optional[bool] = None
    if first_violation is not None:
        outcome = ReportOutcome.NOT_APPLICABLE
        message = f"weak learnability violated at round {first_violation}; theorem not applicable"
    elif not regret_held:
        outcome = ReportOutcome.NOT_APPLICABLE
        message = f"regret {realized_regret:.4f} exceeds gamma T / 2 = {budget:.4f}; theorem not applicable"
    elif log.stop_reason is not StopReason.COMPLETED_T:
        outcome = ReportOutcome.STOPPED_EARLY
        message = f"run stopped early ({log.stop_reason.value}); preconditions held on {T} rounds"
    else:
        conclusion = not penalties_from_errors([worst], log.theta)[0]
        if conclusion:
            outcome = ReportOutcome.CONCLUSION_HOLDS
            message = f"preconditions held; worst-class training error {worst:.4g} < {bound:.4g}"
        else:
            outcome = ReportOutcome.CONCLUSION_FAILS
            message = (
                f"preconditions held but worst-class training error {worst:.4g} >= {bound:.4g}; "
                "the majority vote does not meet the bound"
            )
            UnifiedLogger.get_logger(__name__).bind(log_type="run", status="warning").warning(message)

    return Theorem1Report(
        slack=slack,
        first_violation=first_violation,
        regret=realized_regret,
        regret_budget=budget,
        weak_learnability_held=wl_held,
        regret_held=regret_held,
        worst_class_error=worst,
        bound=bound,
        conclusion_holds=conclusion,
        outcome=outcome,
        message=message,
        delta=config.delta,
    )


class GeneralizationBound(NamedTuple):
    value: float
    vacuous: bool


def generalization_bound(theta: float, C: float, n_k_min: int, delta: float) -> GeneralizationBound:
    """1 - theta + 2 C / sqrt(n) + 3 sqrt(ln(2 / delta) / (2 n)), n = min_k n_k.

    Values above 1 are returned unchanged and flagged as vacuous.
    """
    validate_theta(theta)
    if not C > 0:
        raise ConfigError(f"C must be positive, got {C}")
    if n_k_min < 1:
        raise ConfigError(f"n_k_min must be at least 1, got {n_k_min}")
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    n = float(n_k_min)
    value = 1.0 - theta + 2.0 * C / math.sqrt(n) + 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * n))
    return GeneralizationBound(value, value > 1.0)


@dataclass(frozen=True)
class VoteCountRow:
    """Majority-vote counting step for one class (1-based ``label``)."""

    label: int
    members_satisfying: int
    members: int
    ensemble_error: float
    ensemble_satisfies: bool

    @property
    def majority_satisfies(self) -> bool:
        return 2 * self.members_satisfying > self.members

    @property
    def implication_holds(self) -> bool:
        return (not self.majority_satisfies) or self.ensemble_satisfies


def majority_vote_counting_check(result: BoostResult, data: LabeledDataset) -> List[VoteCountRow]:
    """For each class: how many members keep its error below 1 - theta, and
    whether the majority vote does. A strict member majority is required."""
    theta = result.config.theta
    members = result.ensemble.members
    satisfied = np.zeros(data.num_classes, dtype=np.int64)
    for member in members:
        errors = class_errors_from_predictions(data, member.predict_batch(data.features))
        satisfied += 1 - penalties_from_errors(errors, theta)
    ensemble_errors = class_errors_from_predictions(data, result.ensemble.predict_batch(data.features))
    ensemble_ok = 1 - penalties_from_errors(ensemble_errors, theta)
    return [
        VoteCountRow(k + 1, int(satisfied[k]), len(members), float(ensemble_errors[k]), bool(ensemble_ok[k]))
        for k in range(data.num_classes)
    ]
