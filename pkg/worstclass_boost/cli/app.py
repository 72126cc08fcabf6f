"""Command-line interface for worstclass_boost.

Every command prints a JSON document on stdout. Failures print
``{"error": {"code": ..., "message": ...}}`` on stderr and exit with status 1
for domain errors or 2 for unexpected ones.
"""

import json
import sys
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import click
import numpy as np

from worstclass_boost import __version__
from worstclass_boost.config import get_config
from worstclass_boost.decorators.exception_handler import exception_handler
from worstclass_boost.decorators.run_logger import run_logger
from worstclass_boost.log_system.unified_logger import UnifiedLogger
from worstclass_boost.models.errors import BoostingError, ConfigError
from worstclass_boost.models.schemas import ClassWeights
from worstclass_boost.services.booster import (
    BoostConfig,
    BoostResult,
    generalization_bound,
    run_average_boost,
    run_worstclass_boost,
    theorem1_precondition_report,
)
from worstclass_boost.services.datasets import gen_balanced_toy, gen_imbalanced_toy
from worstclass_boost.services.metrics import worst_class_error
from worstclass_boost.services.weak_learners import fit_weighted_tree, hypothesis_from_dict, train_weighted_tree
from worstclass_boost.storage.dataset_files import load_dataset, save_dataset
from worstclass_boost.storage.run_store import write_json_atomic
from worstclass_boost.tools.experiment import (
    ExperimentConfig,
    LearnerConfig,
    load_runs,
    make_learner,
    run_experiment,
    select_theta_by_validation,
    validation_scores,
    write_reports,
)
from worstclass_boost.tools.exports import export_boundary_grid, export_weight_trajectory

METHOD_CHOICES = ["worstclass_boost", "average_boost", "plain_tree", "balanced_tree"]


def _emit(payload: Dict[str, Any]) -> None:
    click.echo(json.dumps(payload, indent=2, default=str))


def reports_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Turn exceptions into the JSON error document and a nonzero exit code."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except BoostingError as e:
            click.echo(json.dumps({"error": e.to_dict()}, default=str), err=True)
            sys.exit(1)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as e:
            error = {"code": "internal_error", "message": f"{type(e).__name__}: {e}"}
            click.echo(json.dumps({"error": error}), err=True)
            sys.exit(2)

    return wrapper


def command(group: click.Group, name: str):
    """Register ``name`` with error reporting, run logging and exception logging."""

    def decorator(func):
        logged = run_logger(exception_handler(func), prefix="cmd", log_type="command")
        return group.command(name)(reports_errors(logged))

    return decorator


def _load_model(path: str):
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    if "ensemble" in document:
        return hypothesis_from_dict(document["ensemble"])
    if "model" in document:
        return hypothesis_from_dict(document["model"])
    raise ConfigError(f"{path} holds neither an ensemble nor a model")


@click.group()
@click.version_option(__version__, prog_name="worstclass-boost")
@click.option("--log-level", default=None, help="Console log level (default from config)")
@click.option("--quiet", is_flag=True, help="Disable console logging")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], quiet: bool) -> None:
    """Worst-class boosting: train, evaluate and run experiment sweeps."""
    config = get_config()
    if log_level:
        config.log_level = log_level.upper()
    UnifiedLogger.initialize_from_config(config, console=False if quiet else None)
    ctx.call_on_close(UnifiedLogger.close)


@command(cli, "gen-data")
@click.option("--generator", type=click.Choice(["balanced_toy", "imbalanced_toy"]), default="balanced_toy")
@click.option("--min-nk", type=int, default=100, show_default=True, help="Minority class size (imbalanced)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory")
def gen_data(generator: str, min_nk: int, seed: int, fmt: str, out: str) -> None:
    """Generate a synthetic train/test pair."""
    if generator == "balanced_toy":
        train, test = gen_balanced_toy(seed)
    else:
        train, test = gen_imbalanced_toy(min_nk, seed)
    out_dir = Path(out)
    train_path = save_dataset(train, out_dir / f"train.{fmt}")
    test_path = save_dataset(test, out_dir / f"test.{fmt}")
    _emit({
        "train": str(train_path),
        "test": str(test_path),
        "train_counts": train.class_counts.tolist(),
        "test_counts": test.class_counts.tolist(),
    })


@command(cli, "train")
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--method", type=click.Choice(METHOD_CHOICES), default="worstclass_boost", show_default=True)
@click.option("--theta", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=None, help="Weak-learner edge (default rule from K)")
@click.option("--max-rounds", type=int, default=None)
@click.option("--eta", default="auto", show_default=True)
@click.option("--patience", type=int, default=None, help="Stall patience (default from config)")
@click.option("--learner", type=click.Choice(["weighted_tree", "stump", "oracle"]), default="weighted_tree")
@click.option("--max-depth", type=int, default=None)
@click.option(
    "--early-stop/--no-early-stop", default=False, show_default=True,
    help="Return the shallowest tree depth that passes the round gate",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Result JSON path")
@click.option("--trajectory", type=click.Path(dir_okay=False), default=None, help="Weight trajectory CSV path")
def train(
    data_path: str, method: str, theta: float, gamma: Optional[float], max_rounds: Optional[int], eta: str,
    patience: Optional[int], learner: str, max_depth: Optional[int], early_stop: bool, seed: int, out: str,
    trajectory: Optional[str],
) -> None:
    """Train one model and write it with its round log."""
    app_config = get_config()
    data = load_dataset(data_path)
    depth = max_depth or app_config.tree_max_depth
    summary: Dict[str, Any] = {"method": method, "out": out}

    if method in ("worstclass_boost", "average_boost"):
        try:
            eta_value = eta if eta == "auto" else float(eta)
        except ValueError as e:
            raise ConfigError(f"eta must be a number or 'auto', got {eta!r}") from e
        config = BoostConfig(
            theta=theta,
            gamma=gamma,
            epsilon=app_config.epsilon,
            max_rounds=max_rounds,
            eta=eta_value,
            patience=patience if patience is not None else app_config.patience,
            seed=seed,
        )
        weak = make_learner(
            LearnerConfig(name=learner, max_depth=depth, early_stop=early_stop),
            theta if method == "worstclass_boost" else None,
            config.resolve_gamma(data.num_classes),
            seed,
        )
        runner = run_worstclass_boost if method == "worstclass_boost" else run_average_boost
        result = runner(data, weak, config)
        write_json_atomic(out, result.to_dict())
        summary.update(
            rounds=len(result.log),
            stop_reason=result.stop_reason.value,
            train=result.final_report.to_dict(),
        )
        if method == "worstclass_boost":
            summary["guarantee"] = theorem1_precondition_report(result.log, config).message
        if trajectory:
            exported = export_weight_trajectory(result.log, trajectory)
            summary["trajectory"] = {"path": str(exported.path), "heaviest_class": exported.heaviest_class}
    else:
        if method == "plain_tree":
            model = fit_weighted_tree(data, np.full(data.n, 1.0 / data.n), depth, seed)
        else:
            model = train_weighted_tree(data, ClassWeights.uniform(data.num_classes), depth, seed)
        write_json_atomic(out, {"method": method, "model": model.to_dict()})
        summary["train"] = worst_class_error(model, data).to_dict()
    _emit(summary)


@command(cli, "evaluate")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), required=True)
def evaluate(model_path: str, data_path: str) -> None:
    """Per-class, worst-class and average error of a saved model."""
    model = _load_model(model_path)
    data = load_dataset(data_path, model.num_classes)
    _emit(worst_class_error(model, data).to_dict())


@command(cli, "sweep")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", "seeds", type=int, multiple=True, help="Override seeds (repeatable)")
@click.option("--theta", "thetas", type=float, multiple=True, help="Override theta grid (repeatable)")
@click.option("--gamma", "gammas", type=float, multiple=True, help="Override gamma grid (repeatable)")
@click.option("--max-rounds", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory")
def sweep(
    config_path: str, seeds: Tuple[int, ...], thetas: Tuple[float, ...], gammas: Tuple[float, ...],
    max_rounds: Optional[int], workers: Optional[int], out: Optional[str],
) -> None:
    """Run every (variant, method, theta, gamma, seed) cell of an experiment config."""
    config = ExperimentConfig.from_file(config_path)
    overrides: Dict[str, Any] = {}
    if seeds:
        overrides["seeds"] = list(seeds)
    if thetas:
        overrides["theta_grid"] = list(thetas)
    if gammas:
        overrides["gamma_grid"] = list(gammas)
    if out:
        overrides["output_dir"] = out
    if max_rounds is not None:
        overrides["boost"] = {**config.boost.model_dump(), "max_rounds": max_rounds}
    if overrides:
        config = ExperimentConfig.parse({**config.model_dump(mode="json"), **overrides})
    report = run_experiment(config, workers=workers)
    _emit({
        "output_dir": str(report.output_dir),
        "runs": len(report.runs),
        "failures": [{"key": f["key"], **f["error"]} for f in report.failures],
        "files": {k: str(v) for k, v in report.files.items()},
    })


@command(cli, "select-theta")
@click.option("--runs", "runs_dir", type=click.Path(exists=True, file_okay=False), required=True)
def select_theta(runs_dir: str) -> None:
    """Pick theta by worst-class validation error from a finished sweep."""
    _emit({"theta": select_theta_by_validation(validation_scores(load_runs(runs_dir)))})


@command(cli, "export-boundary")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bounds", type=float, nargs=4, required=True, help="xmin xmax ymin ymax")
@click.option("--resolution", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def export_boundary(model_path: str, bounds: Tuple[float, float, float, float], resolution: int, out: str) -> None:
    """Write predicted classes over a 2-D lattice as CSV."""
    path = export_boundary_grid(_load_model(model_path), bounds, resolution, out)
    _emit({"out": str(path), "rows": resolution * resolution})


@command(cli, "bound")
@click.option("--theta", type=float, required=True)
@click.option("--C", "--c", "C", type=float, required=True, help="Rademacher complexity constant")
@click.option("--n-min", type=int, required=True, help="Smallest class size")
@click.option("--delta", type=float, default=0.05, show_default=True)
def bound(theta: float, C: float, n_min: int, delta: float) -> None:
    """Generalization bound on the worst-class error."""
    value = generalization_bound(theta, C, n_min, delta)
    _emit({"value": value.value, "vacuous": value.vacuous})


@command(cli, "report")
@click.option("--runs", "runs_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--result", "result_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Also check the worst-class guarantee for one saved result")
def report(runs_dir: str, result_path: Optional[str]) -> None:
    """Recompute report tables from the stored runs of a sweep."""
    runs = [r for r in load_runs(runs_dir) if r.get("status") == "ok"]
    pivot = any(r.get("variant") for r in runs)
    aggregate, _, trajectory, files = write_reports(runs, Path(runs_dir), pivot)
    payload: Dict[str, Any] = {
        "runs": len(runs),
        "files": {k: str(v) for k, v in files.items()},
        "aggregate": json.loads(aggregate.to_json(orient="records")),
    }
    if result_path:
        with open(result_path, encoding="utf-8") as f:
            result = BoostResult.from_dict(json.load(f))
        payload["guarantee"] = theorem1_precondition_report(result.log, result.config).to_dict()
    _emit(payload)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
