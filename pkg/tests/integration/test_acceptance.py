"""Reproduction checks on the synthetic toys.

The oracle checks are fast. The toy experiments train hundreds of trees per
seed and are marked ``slow``; deselect them with ``-m "not slow"``.
"""

import numpy as np
import pytest

from worstclass_boost.models.schemas import ClassWeights
from worstclass_boost.services.booster import (
    BoostConfig,
    majority_vote_counting_check,
    run_average_boost,
    run_worstclass_boost,
    theorem1_precondition_report,
)
from worstclass_boost.services.datasets import (
    default_balanced_spec,
    default_imbalanced_spec,
    gen_balanced_toy,
    sample_blobs,
)
from worstclass_boost.services.hedge import sufficient_rounds, time_averaged_weights
from worstclass_boost.services.metrics import class_errors_from_predictions, worst_class_error
from worstclass_boost.services.weak_learners import OracleWeakLearner, WeightedTreeLearner, train_weighted_tree

TOY_GAMMA = 0.0995
TOY_THETA = 0.75
SEEDS = range(5)


class TestOracleGuarantee:
    def test_twenty_seeds_on_balanced_toy(self):
        """Oracle edge 0.1 checked against gamma 0.0995, so the run lasts 326 rounds."""
        train, _ = gen_balanced_toy(0, default_balanced_spec().with_counts([20] * 5, [1] * 5))
        assert sufficient_rounds(5, TOY_GAMMA) == 326
        for seed in range(20):
            config = BoostConfig(theta=TOY_THETA, gamma=TOY_GAMMA, patience=None, seed=seed)
            result = run_worstclass_boost(train, OracleWeakLearner(0.1, TOY_THETA, seed=seed), config)
            assert len(result.log) == 326
            assert result.final_report.worst_class_error < 1 - TOY_THETA
            for record in result.log.records:
                assert abs(record.weights.sum() - 1.0) <= 1e-9
            report = theorem1_precondition_report(result.log, config)
            assert report.conclusion_holds is True


@pytest.mark.slow
class TestBalancedToy:
    @pytest.fixture(scope="class")
    def runs(self):
        spec = default_balanced_spec().with_counts([100] * 5, [20_000] * 5)
        outcomes = []
        for seed in SEEDS:
            # the training sample does not depend on the test size
            train, test = sample_blobs(spec, seed)
            config = BoostConfig(theta=TOY_THETA, gamma=TOY_GAMMA, seed=seed)
            worst = run_worstclass_boost(train, WeightedTreeLearner(seed=seed), config)
            average = run_average_boost(train, WeightedTreeLearner(seed=seed), config)
            plain = train_weighted_tree(train, ClassWeights.uniform(5), max_depth=2, seed=seed)
            outcomes.append({
                "worst_train": worst.final_report.worst_class_error,
                "counting": majority_vote_counting_check(worst, train),
                "worst_test": worst_class_error(worst.ensemble, test).worst_class_error,
                "average_test": worst_class_error(average.ensemble, test).worst_class_error,
                "heaviest": int(np.argmax(time_averaged_weights(worst.log.class_ledger()))),
                "plain_worst": int(np.argmax(
                    class_errors_from_predictions(train, plain.predict_batch(train.features))
                )),
            })
        return outcomes

    def test_training_worst_class_within_bound(self, runs):
        assert all(run["worst_train"] <= 1 - TOY_THETA for run in runs)

    def test_counting_step_on_every_run(self, runs):
        assert all(row.implication_holds for run in runs for row in run["counting"])

    def test_beats_average_booster_on_worst_class(self, runs):
        wins = sum(run["worst_test"] < run["average_test"] for run in runs)
        assert wins >= 4

    def test_hardest_class_gets_most_weight(self, runs):
        matches = sum(run["heaviest"] == run["plain_worst"] for run in runs)
        assert matches >= 4


@pytest.mark.slow
class TestImbalancedToy:
    def test_worst_class_error_shrinks_with_minority_size(self):
        means = []
        for min_nk in (10, 50, 100):
            spec = default_imbalanced_spec(min_nk)
            spec = spec.with_counts([b.n_train for b in spec.blobs], [20_000, 10_000, 20_000, 20_000])
            errors = []
            for seed in SEEDS:
                train, test = sample_blobs(spec, seed)
                config = BoostConfig(theta=0.5, gamma=TOY_GAMMA, seed=seed)
                result = run_worstclass_boost(train, WeightedTreeLearner(seed=seed), config)
                errors.append(worst_class_error(result.ensemble, test).worst_class_error)
            means.append(float(np.mean(errors)))
        assert means[0] >= means[1] >= means[2]
