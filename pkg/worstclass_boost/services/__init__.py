"""Services for worstclass_boost: metrics, Hedge, weak learners, boosters and data generators."""

from .booster import (
    BoostConfig,
    BoostResult,
    RoundLog,
    ReportOutcome,
    RoundRecord,
    StopReason,
    generalization_bound,
    majority_vote_counting_check,
    run_average_boost,
    run_worstclass_boost,
    theorem1_precondition_report,
)
from .datasets import (
    BlobSpec,
    ClassBlob,
    bayes_predict,
    gen_balanced_toy,
    gen_imbalanced_toy,
    stratified_split,
)
from .hedge import (
    HedgeState,
    RegretLedger,
    batch_regret,
    default_eta,
    hedge_update,
    init_weights,
    regret,
    regret_bound,
    sufficient_rounds,
)
from .metrics import (
    class_wise_error,
    majority_vote,
    weighted_error,
    worst_class_error,
    zero_one_penalty,
)
from .weak_learners import (
    OracleWeakLearner,
    StumpLearner,
    WeakLearnabilityCheck,
    WeightedTreeLearner,
    check_weak_learnability,
    default_gamma,
    train_weighted_stump,
    train_weighted_tree,
)

__all__ = [
    "BoostConfig",
    "BoostResult",
    "RoundLog",
    "ReportOutcome",
    "RoundRecord",
    "StopReason",
    "generalization_bound",
    "majority_vote_counting_check",
    "run_average_boost",
    "run_worstclass_boost",
    "theorem1_precondition_report",
    "BlobSpec",
    "ClassBlob",
    "bayes_predict",
    "gen_balanced_toy",
    "gen_imbalanced_toy",
    "stratified_split",
    "HedgeState",
    "RegretLedger",
    "batch_regret",
    "default_eta",
    "hedge_update",
    "init_weights",
    "regret",
    "regret_bound",
    "sufficient_rounds",
    "class_wise_error",
    "majority_vote",
    "weighted_error",
    "worst_class_error",
    "zero_one_penalty",
    "OracleWeakLearner",
    "StumpLearner",
    "WeakLearnabilityCheck",
    "WeightedTreeLearner",
    "check_weak_learnability",
    "default_gamma",
    "train_weighted_stump",
    "train_weighted_tree",
]
