"""Experiment harness: config-driven sweeps over methods, theta, gamma and seeds.

A sweep expands an ``ExperimentConfig`` into independent cells
(dataset variant, method, theta, gamma, seed). Cells run in worker threads,
each one under its own correlation ID, and every finished cell is written
atomically to a content-addressed JSON file so an interrupted sweep resumes
where it stopped. Aggregate tables are recomputed from those files alone.
"""

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from worstclass_boost.config import get_config
from worstclass_boost.decorators.exception_handler import exception_handler
from worstclass_boost.decorators.parallelize import CellFailure, parallelize
from worstclass_boost.decorators.run_logger import run_logger
from worstclass_boost.log_system.unified_logger import UnifiedLogger
from worstclass_boost.models.errors import BoostingError, ConfigError
from worstclass_boost.models.schemas import ClassWeights, Hypothesis, LabeledDataset
from worstclass_boost.services.booster import (
    BoostConfig,
    BoostResult,
    run_average_boost,
    run_worstclass_boost,
)
from worstclass_boost.services.datasets import GENERATORS, BlobSpec, stratified_split
from worstclass_boost.services.hedge import time_averaged_weights
from worstclass_boost.services.metrics import error_report_from_predictions, require_nonempty
from worstclass_boost.services.weak_learners import (
    DEFAULT_MAX_DEPTH,
    OracleWeakLearner,
    StumpLearner,
    WeakLearner,
    WeightedTreeLearner,
    fit_weighted_tree,
    train_weighted_tree,
)
from worstclass_boost.storage.dataset_files import load_dataset
from worstclass_boost.storage.run_store import RunStore, run_key, write_json_atomic

MethodName = Literal["worstclass_boost", "average_boost", "plain_tree", "balanced_tree"]
DEFAULT_THETA_GRID = [round(0.1 * i, 1) for i in range(1, 10)]
DEFAULT_SEEDS = [0, 1, 2, 3, 4]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class DatasetConfig(BaseModel):
    """Where the data comes from: a generator with parameters, or files.

    ``sweep`` maps one generator parameter to a list of values; each value
    becomes a dataset variant (for example ``{"min_nk": [10, 50, 100]}``).
    ``validation_ratio`` carves a stratified validation split out of the
    training sample (the default 0.7 keeps 70% for training); ``null`` turns
    it off. A ``validation_path`` replaces the split.
    """

    model_config = ConfigDict(extra="forbid")

    generator: Optional[Literal["balanced_toy", "imbalanced_toy"]] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    blobs: Optional[Dict[str, Any]] = None
    sweep: Dict[str, List[Any]] = Field(default_factory=dict)
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    validation_path: Optional[str] = None
    num_classes: Optional[int] = None
    validation_ratio: Optional[float] = 0.7

    @model_validator(mode="after")
    def _one_source(self) -> "DatasetConfig":
        if self.generator is None and (self.train_path is None or self.test_path is None):
            raise ValueError("dataset needs either a generator or both train_path and test_path")
        if self.generator is not None and self.train_path is not None:
            raise ValueError("dataset takes a generator or files, not both")
        if len(self.sweep) > 1:
            raise ValueError("dataset sweep supports a single parameter")
        if self.sweep and self.generator is None:
            raise ValueError("dataset sweep requires a generator")
        if self.validation_ratio is not None and not (0.0 < self.validation_ratio < 1.0):
            raise ValueError("validation_ratio must lie in (0, 1)")
        if "validation_ratio" in self.model_fields_set and self.validation_ratio is not None and self.validation_path:
            raise ValueError("use validation_ratio or validation_path, not both")
        return self

    def variants(self) -> List[Dict[str, Any]]:
        if not self.sweep:
            return [{}]
        (name, values), = self.sweep.items()
        return [{name: v} for v in values]


class LearnerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["weighted_tree", "stump", "oracle"] = "weighted_tree"
    max_depth: int = Field(default=DEFAULT_MAX_DEPTH, ge=1)
    early_stop: bool = False


class BoostSettings(BaseModel):
    """Booster parameters shared by all cells; theta comes from the grid."""

    model_config = ConfigDict(extra="forbid")

    gamma: Optional[float] = None
    epsilon: float = 0.0005
    max_rounds: Optional[int] = None
    eta: Union[float, Literal["auto"]] = "auto"
    eta_rule: Literal["classes", "samples"] = "classes"
    patience: Optional[int] = 100
    delta: Optional[float] = None

    def to_boost_config(self, theta: float, gamma: Optional[float], seed: int) -> BoostConfig:
        return BoostConfig(
            theta=theta,
            gamma=gamma if gamma is not None else self.gamma,
            epsilon=self.epsilon,
            max_rounds=self.max_rounds,
            eta=self.eta,
            eta_rule=self.eta_rule,
            patience=self.patience,
            seed=seed,
            delta=self.delta,
        )


class ExperimentConfig(BaseModel):
    """One JSON document describing a full sweep."""

    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    dataset: DatasetConfig
    methods: List[MethodName] = Field(default_factory=lambda: ["worstclass_boost", "average_boost", "plain_tree"])
    boost: BoostSettings = Field(default_factory=BoostSettings)
    learner: LearnerConfig = Field(default_factory=LearnerConfig)
    theta_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    gamma_grid: Optional[List[float]] = None
    seeds: List[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS))
    output_dir: Optional[str] = None
    max_workers: Optional[int] = Field(default=None, ge=1)
    save_models: bool = True

    @field_validator("theta_grid")
    @classmethod
    def _theta_range(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("theta_grid must be nonempty")
        for theta in values:
            if not (0.0 <= theta < 1.0):
                raise ValueError(f"theta {theta} outside [0, 1)")
        return values

    @field_validator("gamma_grid")
    @classmethod
    def _gamma_range(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is not None:
            if not values:
                raise ValueError("gamma_grid must be nonempty when given")
            for gamma in values:
                if not (0.0 < gamma < 0.5):
                    raise ValueError(f"gamma {gamma} outside (0, 1/2)")
        return values

    @field_validator("seeds")
    @classmethod
    def _seeds_nonempty(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError("seeds must be nonempty")
        return values

    @field_validator("methods")
    @classmethod
    def _methods_nonempty(cls, values: List[str]) -> List[str]:
        if not values:
            raise ValueError("methods must be nonempty")
        return list(dict.fromkeys(values))

    @classmethod
    def parse(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Validate a decoded document, raising ``ConfigError`` on failure."""
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment config: {e}", errors=e.errors(include_url=False)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read experiment config {path}: {e}") from e
        return cls.parse(data)

    def resolved_output_dir(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return get_config().experiments_dir / self.name

    def settings(self) -> Dict[str, Any]:
        """Everything except the sweep axes and output location; part of every run key."""
        return self.model_dump(mode="json", exclude={"theta_grid", "gamma_grid", "seeds", "methods",
                                                      "output_dir", "max_workers", "name"})

    def cells(self) -> List[Dict[str, Any]]:
        """Cartesian product of variants, methods, theta/gamma (boosters only) and seeds."""
        cells = []
        gammas: Sequence[Optional[float]] = self.gamma_grid or [None]
        for variant, method in itertools.product(self.dataset.variants(), self.methods):
            if method == "worstclass_boost":
                axes = list(itertools.product(self.theta_grid, gammas))
            elif method == "average_boost":
                axes = [(None, g) for g in gammas]
            else:
                axes = [(None, None)]
            for (theta, gamma), seed in itertools.product(axes, self.seeds):
                cells.append({"variant": variant, "method": method, "theta": theta, "gamma": gamma, "seed": seed})
        return cells


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


@dataclass
class Splits:
    train: LabeledDataset
    test: LabeledDataset
    validation: Optional[LabeledDataset] = None
    blob_spec: Optional[BlobSpec] = None


def load_splits(dataset: DatasetConfig, variant: Dict[str, Any], seed: int) -> Splits:
    """Materialize train/test (and validation) for one cell."""
    if dataset.generator is not None:
        params = {**dataset.params, **variant}
        spec = BlobSpec.from_dict(dataset.blobs) if dataset.blobs else None
        generator = GENERATORS[dataset.generator]
        try:
            train, test = generator(seed=seed, spec=spec, **params)
        except TypeError as e:
            raise ConfigError(f"bad parameters for generator {dataset.generator}: {e}") from e
    else:
        train = load_dataset(dataset.train_path, dataset.num_classes)
        test = load_dataset(dataset.test_path, train.num_classes)
        if test.num_classes != train.num_classes:
            raise ConfigError(f"train has {train.num_classes} classes, test has {test.num_classes}")
        spec = None

    validation = None
    if dataset.validation_path is not None:
        validation = load_dataset(dataset.validation_path, train.num_classes)
    elif dataset.validation_ratio is not None:
        train, validation = stratified_split(train, dataset.validation_ratio, seed)
    return Splits(train, test, validation, spec)


def make_learner(config: LearnerConfig, theta: Optional[float], gamma: float, seed: int) -> WeakLearner:
    if config.name == "weighted_tree":
        return WeightedTreeLearner(config.max_depth, config.early_stop, seed)
    if config.name == "stump":
        return StumpLearner(seed)
    if theta is None:
        raise ConfigError("the oracle learner only drives the worst-class booster")
    return OracleWeakLearner(gamma, theta, seed)


def _reports(model: Hypothesis, splits: Splits) -> Dict[str, Dict[str, Any]]:
    reports = {}
    for name in ("train", "test", "validation"):
        data = getattr(splits, name)
        if data is not None:
            require_nonempty(data)
            reports[name] = error_report_from_predictions(data, model.predict_batch(data.features)).to_dict()
    return reports


@run_logger(prefix="run", log_type="run")
@exception_handler
def run_cell(
    settings: Dict[str, Any],
    variant: Dict[str, Any],
    method: str,
    theta: Optional[float],
    gamma: Optional[float],
    seed: int,
) -> Dict[str, Any]:
    """Train and evaluate one (variant, method, theta, gamma, seed) cell."""
    dataset = DatasetConfig.model_validate(settings["dataset"])
    learner_config = LearnerConfig.model_validate(settings["learner"])
    boost = BoostSettings.model_validate(settings["boost"])
    splits = load_splits(dataset, variant, seed)
    train = splits.train

    payload: Dict[str, Any] = {"variant": variant, "method": method, "theta": theta, "gamma": gamma, "seed": seed}
    result: Optional[BoostResult] = None
    if method in ("worstclass_boost", "average_boost"):
        config = boost.to_boost_config(theta if theta is not None else 0.0, gamma, seed)
        resolved_gamma = config.resolve_gamma(train.num_classes)
        learner = make_learner(learner_config, theta if method == "worstclass_boost" else None, resolved_gamma, seed)
        runner = run_worstclass_boost if method == "worstclass_boost" else run_average_boost
        result = runner(train, learner, config)
        model: Hypothesis = result.ensemble
        payload["resolved_gamma"] = result.log.gamma
        payload["rounds"] = len(result.log)
        payload["stop_reason"] = result.stop_reason.value
        if method == "worstclass_boost":
            payload["time_averaged_weights"] = time_averaged_weights(result.log.class_ledger()).tolist()
    elif method == "plain_tree":
        model = fit_weighted_tree(train, np.full(train.n, 1.0 / train.n), learner_config.max_depth, seed)
    elif method == "balanced_tree":
        model = train_weighted_tree(train, ClassWeights.uniform(train.num_classes), learner_config.max_depth, seed)
    else:
        raise ConfigError(f"unknown method {method!r}")

    payload["reports"] = _reports(model, splits)
    payload["metrics"] = {
        "train_worst": payload["reports"]["train"]["worst_class_error"],
        "test_worst": payload["reports"]["test"]["worst_class_error"],
        "test_avg": payload["reports"]["test"]["average_error"],
        "validation_worst": payload["reports"].get("validation", {}).get("worst_class_error"),
    }
    if settings.get("save_models", True):
        payload["result"] = result.to_dict() if result is not None else {"model": model.to_dict()}
    return payload


run_cells = parallelize(run_cell)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def _variant_label(variant: Dict[str, Any]) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(variant.items())) or "-"


def runs_frame(runs: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """One row per successful run: coordinates, class-wise training errors and test metrics."""
    rows = []
    for run in runs:
        if run.get("status", "ok") != "ok":
            continue
        row = {
            "variant": _variant_label(run["variant"]),
            "method": run["method"],
            "theta": np.nan if run["theta"] is None else run["theta"],
            "gamma": np.nan if run["gamma"] is None else run["gamma"],
            "seed": run["seed"],
        }
        for k, err in enumerate(run["reports"]["train"]["per_class_error"], start=1):
            row[f"train_class_{k}"] = err
        row["train_worst"] = run["metrics"]["train_worst"]
        row["test_worst"] = run["metrics"]["test_worst"]
        row["test_avg"] = run["metrics"]["test_avg"]
        if run["metrics"].get("validation_worst") is not None:
            row["validation_worst"] = run["metrics"]["validation_worst"]
        rows.append(row)
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    return frame.sort_values(["variant", "method", "theta", "gamma", "seed"], na_position="first", kind="stable")


def aggregate_runs(runs: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """Mean over seeds for every (variant, method, theta, gamma)."""
    frame = runs_frame(runs)
    if frame.empty:
        return frame
    keys = ["variant", "method", "theta", "gamma"]
    grouped = frame.drop(columns="seed").groupby(keys, dropna=False, sort=True)
    table = grouped.mean()
    table.insert(0, "n_seeds", grouped.size())
    return table.reset_index()


def pivot_worst(aggregate: pd.DataFrame) -> pd.DataFrame:
    """Worst-class test error with one column per dataset variant."""
    index = aggregate[["method", "theta", "gamma"]].astype(str).agg("|".join, axis=1)
    return (
        aggregate.assign(row=index)
        .pivot_table(index="row", columns="variant", values="test_worst", aggfunc="first", sort=True)
        .rename_axis(index="method|theta|gamma", columns=None)
        .reset_index()
    )


def trajectory_summary(runs: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """Per worst-class run: heaviest time-averaged class, and the plain tree's worst
    training class on the same variant and seed (both 1-based)."""
    plain = {
        (_variant_label(r["variant"]), r["seed"]): int(np.argmax(r["reports"]["train"]["per_class_error"])) + 1
        for r in runs
        if r.get("status", "ok") == "ok" and r["method"] == "plain_tree"
    }
    rows = []
    for run in runs:
        if run.get("status", "ok") != "ok" or run["method"] != "worstclass_boost":
            continue
        key = (_variant_label(run["variant"]), run["seed"])
        heaviest = int(np.argmax(run["time_averaged_weights"])) + 1
        worst = plain.get(key)
        rows.append({
            "variant": key[0],
            "theta": run["theta"],
            "gamma": run["gamma"],
            "seed": run["seed"],
            "heaviest_class": heaviest,
            "plain_tree_worst_class": worst,
            "match": None if worst is None else heaviest == worst,
        })
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    output_dir: Path
    aggregate: pd.DataFrame
    runs: List[Dict[str, Any]]
    failures: List[Dict[str, Any]] = field(default_factory=list)
    pivot: Optional[pd.DataFrame] = None
    trajectory: Optional[pd.DataFrame] = None
    files: Dict[str, Path] = field(default_factory=dict)


def write_reports(runs: List[Dict[str, Any]], output_dir: Path, with_pivot: bool) -> Tuple[pd.DataFrame, Optional[pd.DataFrame], pd.DataFrame, Dict[str, Path]]:
    """Write aggregate, pivot and trajectory tables computed from ``runs``."""
    files: Dict[str, Path] = {}
    aggregate = aggregate_runs(runs)
    files["aggregate"] = output_dir / "aggregate.csv"
    aggregate.to_csv(files["aggregate"], index=False, float_format="%.17g")

    pivot = None
    if with_pivot and not aggregate.empty:
        pivot = pivot_worst(aggregate)
        files["pivot"] = output_dir / "pivot_worst.csv"
        pivot.to_csv(files["pivot"], index=False, float_format="%.17g")

    trajectory = trajectory_summary(runs)
    if not trajectory.empty:
        files["trajectory"] = output_dir / "trajectory_summary.csv"
        trajectory.to_csv(files["trajectory"], index=False)
    return aggregate, pivot, trajectory, files


def load_runs(output_dir: Union[str, Path]) -> List[Dict[str, Any]]:
    return list(RunStore(output_dir))


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Run (or resume) every cell of ``config`` and write the report files.

    Cells already stored with status ``ok`` are not recomputed. A failing cell
    is stored with status ``error`` and does not stop the others.
    """
    logger = UnifiedLogger.get_logger(__name__).bind(log_type="run")
    output_dir = config.resolved_output_dir()
    store = RunStore(output_dir)
    settings = config.settings()
    write_json_atomic(output_dir / "config.json", config.model_dump(mode="json"))

    cells = config.cells()
    keys = [run_key(settings, cell) for cell in cells]
    pending = [(key, cell) for key, cell in zip(keys, cells) if (store.load(key) or {}).get("status") != "ok"]
    logger.info(
        f"experiment {config.name}: {len(cells)} cells, {len(cells) - len(pending)} already done"
    )

    n_workers = workers or config.max_workers or get_config().max_workers
    outcomes = run_cells([{"settings": settings, **cell} for _, cell in pending], workers=n_workers)
    failures = []
    for (key, cell), outcome in zip(pending, outcomes):
        if isinstance(outcome, CellFailure):
            error = outcome.error.to_dict() if isinstance(outcome.error, BoostingError) else {
                "code": "internal_error", "message": outcome.message}
            record = {**cell, "key": key, "status": "error", "error": error}
            failures.append(record)
            logger.bind(status="error").warning(f"cell {key} failed: {error['message']}")
        else:
            record = {**outcome, "key": key, "status": "ok"}
        store.save(key, record)

    runs = [store.load(key) for key in keys]
    ok_runs = [r for r in runs if r and r.get("status") == "ok"]
    aggregate, pivot, trajectory, files = write_reports(ok_runs, output_dir, bool(config.dataset.sweep))
    files["failures"] = write_json_atomic(output_dir / "failures.json", failures)
    logger.bind(status="success" if not failures else "error").info(
        f"experiment {config.name} finished: {len(ok_runs)} runs ok, {len(failures)} failed"
    )
    return ExperimentReport(output_dir, aggregate, ok_runs, failures, pivot, trajectory, files)


def validation_scores(runs: Iterable[Dict[str, Any]]) -> List[Tuple[float, float]]:
    """(theta, worst-class validation error) of every finished worst-class booster run.

    Raises:
        ConfigError: A candidate run without a validation split
    """
    scores = []
    for run in runs:
        if run.get("status", "ok") != "ok" or run.get("theta") is None:
            continue
        if run.get("method", "worstclass_boost") != "worstclass_boost":
            continue
        value = (run.get("metrics") or {}).get("validation_worst")
        if value is None:
            raise ConfigError("theta selection needs runs with a validation split", theta=run["theta"])
        scores.append((float(run["theta"]), float(value)))
    return scores


def select_theta_by_validation(scores: Iterable[Tuple[float, float]]) -> float:
    """Theta with the lowest mean worst-class validation error; ties go to the larger theta.

    ``scores`` holds (theta, validation worst-class error) pairs, one per seed.

    Raises:
        ConfigError: No scores
    """
    by_theta: Dict[float, List[float]] = {}
    for theta, value in scores:
        by_theta.setdefault(float(theta), []).append(float(value))
    if not by_theta:
        raise ConfigError("no worst-class boosting runs to select theta from")
    means = {theta: float(np.mean(values)) for theta, values in by_theta.items()}
    best = min(means.values())
    return max(theta for theta, value in means.items() if value <= best + 1e-12)
