"""Tests for boundary and weight-trajectory exports."""

import numpy as np
import pandas as pd
import pytest

from worstclass_boost.models.errors import ConfigError, DimensionError
from worstclass_boost.models.schemas import ClassWeights
from worstclass_boost.services.booster import BoostConfig, run_worstclass_boost
from worstclass_boost.services.weak_learners import (
    ConstantHypothesis,
    LookupHypothesis,
    WeakLearner,
    train_weighted_tree,
)
from worstclass_boost.tools import export_boundary_grid, export_weight_trajectory
from worstclass_boost.tools.exports import boundary_grid


class FixedLearner(WeakLearner):
    name = "fixed"

    def __init__(self, hypothesis):
        self.hypothesis = hypothesis

    def train(self, data, class_weights, accept=None):
        return self.hypothesis


class TestBoundaryGrid:
    def test_lattice_order_and_size(self):
        frame = boundary_grid(ConstantHypothesis(1, 3, 2), (0.0, 2.0, 0.0, 2.0), 3)
        assert len(frame) == 9
        assert list(frame.columns) == ["x", "y", "predicted_class"]
        assert frame["x"].tolist() == [0.0, 1.0, 2.0] * 3
        assert frame["y"].tolist() == [0.0] * 3 + [1.0] * 3 + [2.0] * 3
        assert set(frame["predicted_class"]) == {2}

    def test_tree_labels_are_one_based(self, separable_data, tmp_path):
        tree = train_weighted_tree(separable_data, ClassWeights.uniform(3), max_depth=3)
        path = export_boundary_grid(tree, (-6.0, 6.0, -2.0, 6.0), 25, tmp_path / "grid.csv")
        frame = pd.read_csv(path)
        assert len(frame) == 625
        assert set(frame["predicted_class"]) == {1, 2, 3}

    def test_requires_two_features(self):
        with pytest.raises(DimensionError):
            boundary_grid(ConstantHypothesis(0, 2, 3), (0.0, 1.0, 0.0, 1.0), 3)

    def test_invalid_bounds_and_resolution(self):
        model = ConstantHypothesis(0, 2, 2)
        with pytest.raises(ConfigError):
            boundary_grid(model, (1.0, 0.0, 0.0, 1.0), 3)
        with pytest.raises(ConfigError):
            boundary_grid(model, (0.0, 1.0, 0.0, 1.0), 0)


class TestWeightTrajectory:
    def test_always_failing_class_is_heaviest(self, five_class_data, tmp_path):
        predictions = five_class_data.labels.copy()
        predictions[five_class_data.labels == 1] = 0
        learner = FixedLearner(LookupHypothesis(five_class_data.features, predictions, 5))
        config = BoostConfig(theta=0.5, gamma=0.2, max_rounds=20, patience=None)
        result = run_worstclass_boost(five_class_data, learner, config)

        export = export_weight_trajectory(result.log, tmp_path / "trajectory.csv")
        assert export.rounds == 20
        assert export.heaviest_class == 2
        assert sum(export.time_averaged_weights) == pytest.approx(1.0)

        frame = pd.read_csv(export.path)
        assert list(frame.columns) == ["round", "k", "weight", "feedback"]
        assert len(frame) == 100
        assert frame.groupby("round")["weight"].sum().to_numpy() == pytest.approx(np.ones(20))
        assert set(frame.loc[frame["k"] == 2, "feedback"]) == {0}
        assert set(frame.loc[frame["k"] != 2, "feedback"]) == {1}
