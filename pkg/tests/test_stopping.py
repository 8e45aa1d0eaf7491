#!/usr/bin/env python3 -B
"""Test for setartree.stopping: F-test, error reduction and the alpha schedule."""
import pytest

import setartree.linalg_core
import setartree.shared
import setartree.stopping


def _fit(sse, n_obs=100, n_params=5):
    return setartree.linalg_core.LinearFit(
        beta=[0.0] * n_params, sse=sse, n_obs=n_obs, n_params=n_params)


@pytest.fixture
def parent_fit():
    return _fit(100.0)


def test_zero_improvement_never_passes():
    passed, result = setartree.stopping.check_linearity(100.0, 100.0, 100, 4, 0.05)
    assert not passed
    assert result.f_stat == 0.0
    assert result.p_value == pytest.approx(1.0)


def test_f_statistic_by_hand():
    passed, result = setartree.stopping.check_linearity(100.0, 50.0, 100, 4, 0.05)
    assert passed
    assert result.f_stat == pytest.approx(18.0)
    assert (result.df1, result.df2) == (5, 90)
    assert result.p_value < 1e-10


def test_insufficient_degrees_of_freedom():
    with pytest.raises(setartree.stopping.InsufficientDf):
        setartree.stopping.check_linearity(100.0, 50.0, 12, 5, 0.05)


def test_perfect_children_pass():
    passed, result = setartree.stopping.check_linearity(10.0, 0.0, 100, 2, 0.05)
    assert passed
    assert result.p_value == 0.0


def test_error_reduction():
    assert setartree.stopping.check_error_reduction(100.0, 96.0, 0.03)
    assert not setartree.stopping.check_error_reduction(100.0, 98.0, 0.03)
    assert not setartree.stopping.check_error_reduction(0.0, 0.0, 0.03)


def test_alpha_at_depth():
    assert setartree.stopping.alpha_at_depth(0.05, 2.0, 0) == pytest.approx(0.05)
    assert setartree.stopping.alpha_at_depth(0.05, 2.0, 2) == pytest.approx(0.0125)
    with pytest.raises(ValueError):
        setartree.stopping.alpha_at_depth(0.05, 2.0, -1)


@pytest.mark.parametrize('depth', range(21))
def test_alpha_halves_exactly_per_level(depth):
    assert setartree.stopping.alpha_at_depth(0.05, 2, depth) == 0.05 / 2 ** depth
    assert setartree.stopping.alpha_at_depth(0.05, 2.0, depth) == 0.05 / 2 ** depth


def test_both_needs_the_error_reduction():
    config = setartree.stopping.StoppingConfig(criterion='both')
    # 2% reduction with N=100000 is hugely significant but below 3%
    big_parent = _fit(100.0, n_obs=100000)
    children = (_fit(49.0, n_obs=50000), _fit(49.0, n_obs=50000))
    assert not setartree.stopping.is_good_split(big_parent, children, config, 0)


def test_lin_test_ignores_the_error_reduction():
    config = setartree.stopping.StoppingConfig(criterion='lin_test')
    parent = _fit(100.0, n_obs=100000)
    children = (_fit(49.5, n_obs=50000), _fit(49.5, n_obs=50000))
    assert setartree.stopping.is_good_split(parent, children, config, 0)


def test_error_red_ignores_the_f_test():
    config = setartree.stopping.StoppingConfig(criterion='error_red')
    # 10% reduction, F-test p-value near 1
    parent = _fit(100.0, n_obs=20, n_params=9)
    children = (_fit(45.0, n_obs=10, n_params=9), _fit(45.0, n_obs=10, n_params=9))
    assert setartree.stopping.is_good_split(parent, children, config, 0)


def test_significance_decays_with_depth(parent_fit):
    config = setartree.stopping.StoppingConfig(criterion='lin_test', alpha0=0.05)
    # F=2.5 with (5, 90) df has p around 0.036
    child_sse = 1800.0 / 20.5 / 2.0
    children = (_fit(child_sse), _fit(child_sse))
    assert setartree.stopping.is_good_split(parent_fit, children, config, 0)
    assert not setartree.stopping.is_good_split(parent_fit, children, config, 1)


def test_insufficient_df_rejects_the_split():
    config = setartree.stopping.StoppingConfig(criterion='both')
    parent = _fit(100.0, n_obs=12, n_params=6)
    children = (_fit(10.0, n_obs=6, n_params=6), _fit(10.0, n_obs=6, n_params=6))
    assert not setartree.stopping.is_good_split(parent, children, config, 0)


def test_config_validation_and_record():
    config = setartree.stopping.StoppingConfig(
        criterion=setartree.stopping.StoppingCriterion.from_option('lin-test'), alpha0=0.1)
    assert setartree.stopping.StoppingConfig.from_record(config.to_record()) == config
    with pytest.raises(setartree.shared.UsageError):
        setartree.stopping.StoppingConfig(alpha0=1.5)
    with pytest.raises(setartree.shared.UsageError):
        setartree.stopping.StoppingConfig(significance_divider=1.0)
    with pytest.raises(setartree.shared.UsageError):
        setartree.stopping.StoppingConfig(max_depth=-1)


if __name__ == '__main__':
    pass
