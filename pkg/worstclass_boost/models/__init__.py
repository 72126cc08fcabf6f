from .errors import (
    BoostingError,
    ConfigError,
    ContractViolation,
    DimensionError,
    EmptyClass,
    LabelError,
    NoWeakHypothesis,
    ParseError,
)
from .schemas import (
    ClassErrorReport,
    ClassWeights,
    Ensemble,
    FeedbackVector,
    Hypothesis,
    LabeledDataset,
)

__all__ = [
    "BoostingError",
    "ConfigError",
    "ContractViolation",
    "DimensionError",
    "EmptyClass",
    "LabelError",
    "NoWeakHypothesis",
    "ParseError",
    "ClassErrorReport",
    "ClassWeights",
    "Ensemble",
    "FeedbackVector",
    "Hypothesis",
    "LabeledDataset",
]
