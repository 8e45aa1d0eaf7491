#!/usr/bin/env python3 -B
"""Test for setartree.setar_forest."""
import dataclasses

import numpy as np
import pytest

import setartree.data_model
import setartree.dgp_sim
import setartree.metrics_eval
import setartree.setar_forest
import setartree.setar_tree
import setartree.shared
import setartree.stopping
import utils_for_tests


def _regime_collection(seed, n_series=10, length=82):
    config = setartree.dgp_sim.DgpConfig(
        kind='setar2',
        n_series=n_series,
        length=length,
        seed=seed,
        noise_sd=0.1,
        low_coefficients=(0.3, 0.6, 0.0),
        high_coefficients=(0.8, -0.5, 0.0),
    )
    return setartree.dgp_sim.simulate(config)


@pytest.fixture
def regime_collection():
    return _regime_collection(4)


@pytest.fixture
def regime_matrix(regime_collection):
    return setartree.data_model.create_input_matrix(regime_collection, 2)


@pytest.fixture
def fixed_config():
    """Every tree sees every row with the default stopping values."""
    return setartree.setar_forest.ForestConfig(
        n_trees=1,
        bagging_fraction=1.0,
        alpha0_range=(0.05, 0.05),
        divider_range=(2.0, 2.0),
        error_threshold_range=(0.03, 0.03),
    )


def _constant_tree(value, matrix):
    return setartree.setar_tree.single_leaf_tree(utils_for_tests.leaf((value, 0.0)), matrix)


def test_single_full_tree_forest_is_the_tree(regime_matrix, regime_collection, fixed_config):
    forest = setartree.setar_forest.train_forest(regime_matrix, fixed_config)
    tree = setartree.setar_tree.train_tree(regime_matrix)
    assert forest.trees[0].splits() == tree.splits()
    np.testing.assert_array_equal(
        setartree.setar_forest.forecast_forest(forest, regime_collection, 6).values,
        setartree.setar_tree.forecast(tree, regime_collection, 6).values)


def test_same_seed_same_forest(regime_matrix, regime_collection):
    config = setartree.setar_forest.ForestConfig(n_trees=3, seed=42)
    first = setartree.setar_forest.train_forest(regime_matrix, config)
    second = setartree.setar_forest.train_forest(regime_matrix, config, threads=3)
    for left, right in zip(first.plans, second.plans):
        np.testing.assert_array_equal(left.rows, right.rows)
        assert left.stopping == right.stopping
    np.testing.assert_array_equal(
        setartree.setar_forest.forecast_forest(first, regime_collection, 4).values,
        setartree.setar_forest.forecast_forest(second, regime_collection, 4).values)


def test_seeds_change_the_row_sample():
    first = setartree.setar_forest.plan_tree(
        0, 1000, 3, setartree.setar_forest.ForestConfig(seed=1))
    second = setartree.setar_forest.plan_tree(
        0, 1000, 3, setartree.setar_forest.ForestConfig(seed=2))
    assert not np.array_equal(first.rows, second.rows)
    other_tree = setartree.setar_forest.plan_tree(
        1, 1000, 3, setartree.setar_forest.ForestConfig(seed=1))
    assert not np.array_equal(first.rows, other_tree.rows)


def test_plan_sizes():
    config = setartree.setar_forest.ForestConfig(bagging_fraction=0.8, feature_fraction=0.5)
    plan = setartree.setar_forest.plan_tree(0, 1000, 3, config)
    assert len(plan.rows) == 800
    assert len(np.unique(plan.rows)) == 800
    assert np.all(np.diff(plan.rows) > 0)
    assert len(plan.columns) == 2
    assert set(plan.columns) <= {0, 1, 2}


def _planned_stopping(randomization, base):
    config = setartree.setar_forest.ForestConfig(randomization=randomization, base_stopping=base)
    return setartree.setar_forest.plan_tree(0, 100, 2, config).stopping


def test_randomization_modes():
    base = setartree.stopping.StoppingConfig(
        alpha0=0.2, significance_divider=3.0, error_threshold=0.5)
    significance = _planned_stopping('significance', base)
    assert 0.01 <= significance.alpha0 <= 0.1
    assert 1.5 <= significance.significance_divider <= 5.0
    assert significance.error_threshold == 0.5
    error_red = _planned_stopping(
        setartree.setar_forest.Randomization.from_option('error-red'), base)
    assert (error_red.alpha0, error_red.significance_divider) == (0.2, 3.0)
    assert 0.01 <= error_red.error_threshold <= 0.05


def test_average_of_constant_trees():
    collection = utils_for_tests.make_collection([1.0, 2.0, 3.0], [4.0, 5.0, 9.0])
    matrix = setartree.data_model.create_input_matrix(collection, 1)
    forest = setartree.setar_forest.SetarForest(
        trees=(_constant_tree(4.0, matrix), _constant_tree(6.0, matrix)),
        plans=(),
        config=setartree.setar_forest.ForestConfig(n_trees=2),
    )
    for combine in setartree.setar_forest.Combine:
        result = setartree.setar_forest.forecast_forest(forest, collection, 3, combine=combine)
        np.testing.assert_allclose(result.values, 5.0)


def test_per_step_uses_the_averaged_model():
    collection = utils_for_tests.make_collection([0.2, 0.4, 0.6], [1.0, 0.5, 0.8])
    matrix = setartree.data_model.create_input_matrix(collection, 1)
    trees = tuple(
        setartree.setar_tree.single_leaf_tree(utils_for_tests.leaf(beta), matrix)
        for beta in ((0.1, 0.9), (0.3, 0.5))
    )
    forest = setartree.setar_forest.SetarForest(
        trees=trees, plans=(), config=setartree.setar_forest.ForestConfig(n_trees=2))
    averaged = setartree.setar_tree.single_leaf_tree(utils_for_tests.leaf((0.2, 0.7)), matrix)
    per_step = setartree.setar_forest.forecast_forest(
        forest, collection, 5, combine=setartree.setar_forest.Combine.from_option('per-step'))
    np.testing.assert_allclose(
        per_step.values, setartree.setar_tree.forecast(averaged, collection, 5).values,
        atol=1e-12)
    per_tree = setartree.setar_forest.forecast_forest(forest, collection, 5)
    np.testing.assert_allclose(per_tree.values[:, 0], per_step.values[:, 0], atol=1e-12)
    assert not np.allclose(per_tree.values[:, 1:], per_step.values[:, 1:])


def test_failed_tree_reports_its_index():
    collection = utils_for_tests.make_collection([1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 7.0])
    matrix = setartree.data_model.create_input_matrix(collection, 1)
    config = setartree.setar_forest.ForestConfig(n_trees=2, bagging_fraction=0.5)
    with pytest.raises(setartree.setar_forest.TreeTrainingError) as err:
        setartree.setar_forest.train_forest(matrix, config)
    assert err.value.tree_index == 0


def test_config_validation():
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.ForestConfig(n_trees=0)
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.ForestConfig(bagging_fraction=0.0)
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.ForestConfig(feature_fraction=1.5)
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.ForestConfig(seed=-1)
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.ForestConfig(alpha0_range=(0.1, 0.01))


def test_record_round_trip(regime_matrix, regime_collection):
    config = setartree.setar_forest.ForestConfig(n_trees=2, seed=7, feature_fraction=0.5)
    forest = setartree.setar_forest.train_forest(regime_matrix, config)
    restored = setartree.setar_forest.SetarForest.from_record(forest.to_record())
    assert restored.config == forest.config
    assert [cur.columns for cur in restored.plans] == [cur.columns for cur in forest.plans]
    np.testing.assert_array_equal(
        setartree.setar_forest.forecast_forest(restored, regime_collection, 4).values,
        setartree.setar_forest.forecast_forest(forest, regime_collection, 4).values)
    for restored_plan, plan in zip(restored.plans, forest.plans):
        np.testing.assert_array_equal(restored_plan.rows, plan.rows)
        assert restored_plan.stopping == plan.stopping
    assert restored.n_training_rows == len(regime_matrix)


def test_record_with_a_foreign_seed(regime_matrix):
    config = setartree.setar_forest.ForestConfig(n_trees=2, seed=7)
    record = setartree.setar_forest.train_forest(regime_matrix, config).to_record()
    record['trees'][1]['seed'] += 1
    with pytest.raises(setartree.shared.DataError):
        setartree.setar_forest.SetarForest.from_record(record)


def test_horizon_below_one(regime_matrix, regime_collection, fixed_config):
    forest = setartree.setar_forest.train_forest(regime_matrix, fixed_config)
    with pytest.raises(setartree.shared.UsageError):
        setartree.setar_forest.forecast_forest(forest, regime_collection, 0)


def test_identical_trees_average_to_each_tree(regime_matrix, regime_collection, fixed_config):
    config = dataclasses.replace(fixed_config, n_trees=10)
    forest = setartree.setar_forest.train_forest(regime_matrix, config, threads=2)
    averaged = setartree.setar_forest.forecast_forest(forest, regime_collection, 6)
    per_tree = setartree.setar_forest.forecast_trees(forest, regime_collection, 6)
    assert len(per_tree) == 10
    for result in per_tree:
        np.testing.assert_allclose(result.values, averaged.values, rtol=0.0, atol=1e-12)


def _logistic_split(seed, horizon):
    config = setartree.dgp_sim.DgpConfig(
        kind='chaotic_logistic', n_series=100, length=600, seed=seed, noise_sd=0.05)
    return setartree.dgp_sim.simulate(config).split_holdout(horizon)


@pytest.mark.slow
def test_chaotic_logistic_ordering(record_property):
    # Noiseless logistic data lets one deep tree nearly interpolate the map,
    # so the forest is compared on noisy series.
    horizon = 8
    lag = setartree.metrics_eval.heuristic_lags(None, horizon)
    tree_beats_pr = 0
    forest_beats_tree = 0
    for seed in range(20):
        train, actual = _logistic_split(seed, horizon)
        matrix = setartree.data_model.create_input_matrix(train, lag)
        pr = setartree.setar_tree.single_leaf_tree(
            setartree.setar_tree.train_pr_baseline(matrix), matrix)
        tree = setartree.setar_tree.train_tree(matrix, threads=4)
        forest = setartree.setar_forest.train_forest(
            matrix, setartree.setar_forest.ForestConfig(seed=seed), threads=4)
        results = (
            setartree.setar_tree.forecast(pr, train, horizon),
            setartree.setar_tree.forecast(tree, train, horizon),
            setartree.setar_forest.forecast_forest(forest, train, horizon, threads=4),
        )
        pr_score, tree_score, forest_score = (
            setartree.metrics_eval.evaluate(result, actual, train, 1).mean_msmape
            for result in results)
        tree_beats_pr += tree_score <= pr_score
        forest_beats_tree += forest_score <= tree_score
    record_property('tree_beats_pr', tree_beats_pr)
    record_property('forest_beats_tree', forest_beats_tree)
    assert tree_beats_pr >= 15
    assert forest_beats_tree >= 15


if __name__ == '__main__':
    pass
