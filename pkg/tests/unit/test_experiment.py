"""Tests for the experiment harness."""

import json

import pandas as pd
import pytest

from worstclass_boost.models.errors import ConfigError
from worstclass_boost.services.datasets import default_balanced_spec, gen_balanced_toy
from worstclass_boost.storage import save_dataset
from worstclass_boost.tools import (
    ExperimentConfig,
    aggregate_runs,
    load_runs,
    run_cell,
    run_experiment,
    select_theta_by_validation,
    validation_scores,
)
from worstclass_boost.tools.experiment import pivot_worst, trajectory_summary


def small_blobs():
    return default_balanced_spec().with_counts([30] * 5, [200] * 5).to_dict()


def small_config(tmp_path, **overrides):
    document = {
        "name": "small",
        "dataset": {"generator": "balanced_toy", "blobs": small_blobs()},
        "methods": ["worstclass_boost", "average_boost", "plain_tree", "balanced_tree"],
        "boost": {"max_rounds": 5},
        "theta_grid": [0.5],
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "out"),
        "save_models": False,
    }
    document.update(overrides)
    return ExperimentConfig.parse(document)


def fake_run(method, theta, seed, test_worst, validation_worst=None, variant=None):
    return {
        "status": "ok",
        "variant": variant or {},
        "method": method,
        "theta": theta,
        "gamma": None,
        "seed": seed,
        "reports": {"train": {"per_class_error": [0.1, 0.3]}},
        "metrics": {
            "train_worst": 0.3,
            "test_worst": test_worst,
            "test_avg": test_worst / 2,
            "validation_worst": validation_worst,
        },
        "time_averaged_weights": [0.3, 0.7],
    }


class TestExperimentConfig:
    @pytest.mark.parametrize(
        "change",
        [
            {"gamma_grid": [0.6]},
            {"theta_grid": []},
            {"theta_grid": [1.0]},
            {"seeds": []},
            {"methods": ["gradient_boost"]},
            {"unknown": 1},
            {"dataset": {"params": {}}},
            {"dataset": {"generator": "balanced_toy", "sweep": {"a": [1], "b": [2]}}},
            {"dataset": {"generator": "balanced_toy", "validation_ratio": 1.5}},
        ],
    )
    def test_invalid_documents(self, tmp_path, change):
        with pytest.raises(ConfigError):
            small_config(tmp_path, **change)

    def test_from_file_errors(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(path)
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(tmp_path / "missing.json")

    def test_cells_axes(self, tmp_path):
        config = small_config(
            tmp_path,
            methods=["worstclass_boost", "average_boost", "plain_tree"],
            theta_grid=[0.3, 0.5],
            gamma_grid=[0.1, 0.2],
        )
        cells = config.cells()
        by_method = {m: [c for c in cells if c["method"] == m] for m in config.methods}
        assert len(by_method["worstclass_boost"]) == 2 * 2 * 2
        assert len(by_method["average_boost"]) == 2 * 2
        assert all(c["theta"] is None for c in by_method["average_boost"])
        assert len(by_method["plain_tree"]) == 2
        assert all(c["theta"] is None and c["gamma"] is None for c in by_method["plain_tree"])

    def test_sweep_variants(self, tmp_path):
        config = small_config(
            tmp_path,
            dataset={"generator": "imbalanced_toy", "sweep": {"min_nk": [10, 50]}},
            methods=["plain_tree"],
        )
        assert [c["variant"] for c in config.cells()] == [{"min_nk": 10}] * 2 + [{"min_nk": 50}] * 2

    def test_default_output_under_data_dir(self, isolated_dirs, tmp_path):
        config = small_config(tmp_path, output_dir=None)
        assert config.resolved_output_dir() == isolated_dirs / "data" / "experiments" / "small"

    def test_settings_exclude_axes(self, tmp_path):
        settings = small_config(tmp_path).settings()
        assert "seeds" not in settings and "theta_grid" not in settings
        assert settings["boost"]["max_rounds"] == 5


class TestRunCell:
    def test_worstclass_payload(self, tmp_path):
        settings = small_config(tmp_path, save_models=True).settings()
        payload = run_cell(settings=settings, variant={}, method="worstclass_boost", theta=0.5, gamma=None, seed=0)
        assert payload["rounds"] <= 5
        assert set(payload["reports"]) == {"train", "test", "validation"}
        assert payload["metrics"]["test_worst"] == payload["reports"]["test"]["worst_class_error"]
        assert payload["metrics"]["validation_worst"] == payload["reports"]["validation"]["worst_class_error"]
        assert len(payload["time_averaged_weights"]) == 5
        assert payload["result"]["method"] == "worstclass_boost"
        json.dumps(payload)

    def test_trees_have_no_rounds(self, tmp_path):
        settings = small_config(tmp_path).settings()
        payload = run_cell(settings=settings, variant={}, method="plain_tree", theta=None, gamma=None, seed=1)
        assert "rounds" not in payload
        assert "result" not in payload

    def test_oracle_rejected_for_average_booster(self, tmp_path):
        settings = small_config(tmp_path, learner={"name": "oracle"}, gamma_grid=[0.1]).settings()
        with pytest.raises(ConfigError):
            run_cell(settings=settings, variant={}, method="average_boost", theta=None, gamma=0.1, seed=0)

    def test_file_dataset(self, tmp_path):
        train, test = gen_balanced_toy(0, default_balanced_spec().with_counts([20] * 5, [30] * 5))
        dataset = {
            "train_path": str(save_dataset(train, tmp_path / "train.csv")),
            "test_path": str(save_dataset(test, tmp_path / "test.jsonl")),
            "validation_ratio": 0.7,
        }
        settings = small_config(tmp_path, dataset=dataset).settings()
        payload = run_cell(settings=settings, variant={}, method="balanced_tree", theta=None, gamma=None, seed=0)
        assert set(payload["reports"]) == {"train", "test", "validation"}
        assert payload["metrics"]["validation_worst"] is not None


class TestRunExperiment:
    def test_small_sweep(self, tmp_path):
        report = run_experiment(small_config(tmp_path), workers=2)
        assert not report.failures
        assert len(report.runs) == 2 + 2 + 2 + 2
        assert report.aggregate["n_seeds"].tolist() == [2, 2, 2, 2]
        assert set(report.aggregate["method"]) == {"worstclass_boost", "average_boost", "plain_tree", "balanced_tree"}
        assert {"aggregate", "failures"} <= set(report.files)
        assert report.pivot is None
        for path in report.files.values():
            assert path.exists()
        assert (report.output_dir / "config.json").exists()
        assert len(report.trajectory) == 2

    def test_resume_skips_finished_cells(self, tmp_path):
        config = small_config(tmp_path, methods=["plain_tree", "worstclass_boost"])
        first = run_experiment(config, workers=2)
        stamps = {p.name: p.stat().st_mtime_ns for p in (first.output_dir / "runs").iterdir()}
        second = run_experiment(config, workers=2)
        assert {p.name: p.stat().st_mtime_ns for p in (second.output_dir / "runs").iterdir()} == stamps
        pd.testing.assert_frame_equal(first.aggregate, second.aggregate)

    def test_aggregate_recomputed_from_files(self, tmp_path):
        report = run_experiment(small_config(tmp_path, methods=["worstclass_boost", "plain_tree"]), workers=1)
        recomputed = aggregate_runs(load_runs(report.output_dir))
        pd.testing.assert_frame_equal(recomputed, report.aggregate)
        saved = pd.read_csv(report.files["aggregate"], float_precision="round_trip")
        assert saved["test_worst"].tolist() == report.aggregate["test_worst"].tolist()

    def test_failing_cells_are_recorded(self, tmp_path):
        config = small_config(
            tmp_path, methods=["worstclass_boost", "average_boost"], learner={"name": "oracle"}, gamma_grid=[0.1]
        )
        report = run_experiment(config, workers=2)
        assert len(report.failures) == 2
        assert {f["method"] for f in report.failures} == {"average_boost"}
        assert all(f["error"]["code"] == "config_error" for f in report.failures)
        assert len(report.runs) == 2
        assert json.loads(report.files["failures"].read_text())[0]["status"] == "error"

    def test_validation_selects_a_grid_theta(self, tmp_path):
        dataset = {"generator": "balanced_toy", "blobs": small_blobs(), "validation_ratio": 0.7}
        config = small_config(tmp_path, dataset=dataset, methods=["worstclass_boost"], theta_grid=[0.3, 0.6])
        report = run_experiment(config, workers=2)
        assert select_theta_by_validation(validation_scores(report.runs)) in (0.3, 0.6)


class TestAggregation:
    def test_means_over_seeds(self):
        runs = [fake_run("worstclass_boost", 0.5, s, v) for s, v in enumerate((0.2, 0.4))]
        runs.append({"status": "error", "method": "worstclass_boost"})
        table = aggregate_runs(runs)
        assert len(table) == 1
        assert table.loc[0, "test_worst"] == pytest.approx(0.3)
        assert table.loc[0, "n_seeds"] == 2
        assert table.loc[0, "train_class_2"] == pytest.approx(0.3)

    def test_pivot_one_column_per_variant(self):
        runs = [
            fake_run("plain_tree", None, 0, 0.5, variant={"min_nk": 10}),
            fake_run("plain_tree", None, 0, 0.2, variant={"min_nk": 100}),
        ]
        pivot = pivot_worst(aggregate_runs(runs))
        assert list(pivot.columns) == ["method|theta|gamma", "min_nk=10", "min_nk=100"]
        assert pivot.iloc[0]["min_nk=10"] == 0.5

    def test_trajectory_matches_plain_tree_worst_class(self):
        runs = [fake_run("worstclass_boost", 0.5, 0, 0.2), fake_run("plain_tree", None, 0, 0.3)]
        summary = trajectory_summary(runs)
        assert summary.loc[0, "heaviest_class"] == 2
        assert summary.loc[0, "plain_tree_worst_class"] == 2
        assert bool(summary.loc[0, "match"])


class TestValidationSplit:
    def test_seven_to_three_by_default(self, tmp_path):
        config = small_config(tmp_path)
        assert config.dataset.validation_ratio == 0.7
        settings = config.settings()
        payload = run_cell(settings=settings, variant={}, method="balanced_tree", theta=None, gamma=None, seed=0)
        assert payload["metrics"]["validation_worst"] is not None

    def test_null_ratio_disables_the_split(self, tmp_path):
        dataset = {"generator": "balanced_toy", "blobs": small_blobs(), "validation_ratio": None}
        settings = small_config(tmp_path, dataset=dataset).settings()
        payload = run_cell(settings=settings, variant={}, method="plain_tree", theta=None, gamma=None, seed=0)
        assert set(payload["reports"]) == {"train", "test"}
        assert payload["metrics"]["validation_worst"] is None

    def test_validation_file_replaces_default_ratio(self, tmp_path):
        train, test = gen_balanced_toy(0, default_balanced_spec().with_counts([20] * 5, [30] * 5))
        dataset = {
            "train_path": str(save_dataset(train, tmp_path / "train.csv")),
            "test_path": str(save_dataset(test, tmp_path / "test.csv")),
            "validation_path": str(save_dataset(test, tmp_path / "validation.csv")),
        }
        settings = small_config(tmp_path, dataset=dataset).settings()
        payload = run_cell(settings=settings, variant={}, method="plain_tree", theta=None, gamma=None, seed=0)
        assert payload["reports"]["validation"] == payload["reports"]["test"]

    def test_explicit_ratio_and_file_conflict(self, tmp_path):
        dataset = {
            "train_path": "train.csv",
            "test_path": "test.csv",
            "validation_path": "validation.csv",
            "validation_ratio": 0.7,
        }
        with pytest.raises(ConfigError):
            small_config(tmp_path, dataset=dataset)


class TestSelectTheta:
    def test_lowest_mean_wins(self):
        scores = [(theta, value) for theta, value in ((0.5, 0.4), (0.6, 0.3), (0.7, 0.35)) for _ in (0, 1)]
        assert select_theta_by_validation(scores) == 0.6

    def test_mean_over_seeds(self):
        assert select_theta_by_validation([(0.5, 0.1), (0.5, 0.5), (0.6, 0.25)]) == 0.6

    def test_ties_go_to_larger_theta(self):
        assert select_theta_by_validation([(theta, 0.25) for theta in (0.5, 0.6, 0.7)]) == 0.7

    def test_no_scores(self):
        with pytest.raises(ConfigError):
            select_theta_by_validation([])


class TestValidationScores:
    def test_only_theta_and_validation_error_are_passed_on(self):
        runs = [
            fake_run("worstclass_boost", 0.5, 0, test_worst=0.0, validation_worst=0.4),
            fake_run("worstclass_boost", 0.6, 0, test_worst=0.9, validation_worst=0.1),
        ]
        scores = validation_scores(runs)
        assert scores == [(0.5, 0.4), (0.6, 0.1)]
        assert select_theta_by_validation(scores) == 0.6

    def test_other_methods_and_failures_ignored(self):
        runs = [
            fake_run("worstclass_boost", 0.5, 0, 0.0, validation_worst=0.4),
            fake_run("average_boost", 0.9, 0, 0.0, validation_worst=0.0),
            fake_run("plain_tree", None, 0, 0.1),
            {"status": "error", "method": "worstclass_boost", "theta": 0.7},
        ]
        assert validation_scores(runs) == [(0.5, 0.4)]

    def test_missing_validation(self):
        with pytest.raises(ConfigError):
            validation_scores([fake_run("worstclass_boost", 0.5, 0, 0.1)])
