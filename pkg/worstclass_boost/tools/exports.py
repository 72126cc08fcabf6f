"""Plot-ready data exports: decision-boundary lattices and weight trajectories."""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from worstclass_boost.models.errors import ConfigError, ContractViolation, DimensionError
from worstclass_boost.models.schemas import Hypothesis
from worstclass_boost.services.booster import RoundLog
from worstclass_boost.services.hedge import export_ledger_csv, time_averaged_weights

Bounds = Tuple[float, float, float, float]


def boundary_grid(model: Hypothesis, bounds: Bounds, resolution: int) -> pd.DataFrame:
    """Predictions on a resolution x resolution lattice over (xmin, xmax, ymin, ymax).

    Rows run over x fastest; ``predicted_class`` is 1-based.
    """
    if model.n_features != 2:
        raise DimensionError(f"boundary export needs 2 features, model has {model.n_features}")
    if resolution < 1:
        raise ConfigError(f"resolution must be at least 1, got {resolution}")
    xmin, xmax, ymin, ymax = bounds
    if xmin > xmax or ymin > ymax:
        raise ConfigError(f"empty bounds {bounds}")
    xs, ys = np.meshgrid(np.linspace(xmin, xmax, resolution), np.linspace(ymin, ymax, resolution))
    points = np.column_stack([xs.ravel(), ys.ravel()])
    return pd.DataFrame(
        {"x": points[:, 0], "y": points[:, 1], "predicted_class": model.predict_batch(points) + 1}
    )


def export_boundary_grid(
    model: Hypothesis, bounds: Bounds, resolution: int, path: Union[str, Path]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    boundary_grid(model, bounds, resolution).to_csv(path, index=False, float_format="%.17g")
    return path


@dataclass(frozen=True)
class TrajectoryExport:
    path: Path
    rounds: int
    heaviest_class: int  # 1-based, largest time-averaged weight
    time_averaged_weights: Tuple[float, ...]


def export_weight_trajectory(log: RoundLog, path: Union[str, Path]) -> TrajectoryExport:
    """Write the class-weight trajectory of the accepted rounds as long-format CSV."""
    ledger = log.class_ledger()
    if len(ledger) == 0:
        raise ContractViolation("the round log has no accepted rounds")
    averaged = time_averaged_weights(ledger)
    written = export_ledger_csv(ledger, path)
    return TrajectoryExport(written, len(ledger), int(np.argmax(averaged)) + 1, tuple(float(v) for v in averaged))
