#!/usr/bin/env python3 -B
"""Test for setartree.model_store."""
import numpy as np
import pytest
import yaml

import setartree.data_model
import setartree.dgp_sim
import setartree.model_store
import setartree.setar_forest
import setartree.setar_tree
import setartree.shared


@pytest.fixture
def collection():
    config = setartree.dgp_sim.DgpConfig(
        kind='setar2', n_series=8, length=80, seed=6, noise_sd=0.1)
    return setartree.dgp_sim.simulate(config)


@pytest.fixture
def matrix(collection):
    return setartree.data_model.create_input_matrix(collection, 3)


def _round_trip(stored, tmp_path):
    path = tmp_path / 'models' / 'model.yaml'
    setartree.model_store.save_model(stored, path)
    return setartree.model_store.load_model(path)


def test_tree_round_trip(matrix, collection, tmp_path):
    tree = setartree.setar_tree.train_tree(matrix)
    stored = setartree.model_store.StoredModel(
        kind=setartree.model_store.ModelKind.tree, model=tree, horizon=6)
    loaded = _round_trip(stored, tmp_path)
    assert loaded.kind is setartree.model_store.ModelKind.tree
    assert loaded.horizon == 6
    assert loaded.n_lags == 3
    assert loaded.model.splits() == tree.splits()
    np.testing.assert_array_equal(
        setartree.setar_tree.forecast(loaded.model, collection, 6).values,
        setartree.setar_tree.forecast(tree, collection, 6).values)


def test_forest_round_trip(matrix, collection, tmp_path):
    forest = setartree.setar_forest.train_forest(
        matrix, setartree.setar_forest.ForestConfig(n_trees=3, seed=5))
    stored = setartree.model_store.StoredModel(
        kind=setartree.model_store.ModelKind.forest, model=forest)
    loaded = _round_trip(stored, tmp_path)
    assert loaded.horizon is None
    assert loaded.model.config == forest.config
    np.testing.assert_array_equal(
        setartree.setar_forest.forecast_forest(loaded.model, collection, 4).values,
        setartree.setar_forest.forecast_forest(forest, collection, 4).values)


def test_summaries(matrix):
    tree = setartree.setar_tree.train_tree(matrix)
    summary = setartree.model_store.summarize(setartree.model_store.StoredModel(
        kind=setartree.model_store.ModelKind.tree, model=tree))
    assert summary['kind'] == 'tree'
    assert summary['leaf_count'] == len(tree.leaves())
    assert len(summary['splits']) == summary['leaf_count'] - 1
    pr = setartree.setar_tree.single_leaf_tree(
        setartree.setar_tree.train_pr_baseline(matrix), matrix)
    summary = setartree.model_store.summarize(setartree.model_store.StoredModel(
        kind=setartree.model_store.ModelKind.pr, model=pr))
    assert (summary['depth'], summary['leaf_count'], summary['splits']) == (0, 1, [])
    forest = setartree.setar_forest.train_forest(
        matrix, setartree.setar_forest.ForestConfig(n_trees=2))
    summary = setartree.model_store.summarize(setartree.model_store.StoredModel(
        kind=setartree.model_store.ModelKind.forest, model=forest))
    assert len(summary['trees']) == 2
    assert yaml.safe_load(setartree.model_store.dump_yaml(summary)) == summary


def test_missing_model_file(tmp_path):
    with pytest.raises(setartree.shared.UsageError):
        setartree.model_store.load_model(tmp_path / 'absent.yaml')


@pytest.mark.parametrize('text', [
    'format: something-else\n',
    'format: setartree-model\nformat_version: 99\nkind: tree\n',
    'format: setartree-model\nformat_version: 1\nkind: bush\n',
    'format: setartree-model\nformat_version: 1\nkind: tree\nmodel: {}\n',
    '[unclosed\n',
    '- just\n- a list\n',
])
def test_malformed_model_files(tmp_path, text):
    path = tmp_path / 'model.yaml'
    path.write_text(text)
    with pytest.raises(setartree.model_store.ModelFormatError):
        setartree.model_store.load_model(path)


if __name__ == '__main__':
    pass
