"""Experiment operations: sweeps, theta selection and data exports."""

from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    aggregate_runs,
    load_runs,
    run_cell,
    run_experiment,
    select_theta_by_validation,
    validation_scores,
)
from .exports import export_boundary_grid, export_weight_trajectory

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "aggregate_runs",
    "load_runs",
    "run_cell",
    "run_experiment",
    "select_theta_by_validation",
    "validation_scores",
    "export_boundary_grid",
    "export_weight_trajectory",
]
