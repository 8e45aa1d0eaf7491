#!/usr/bin/env python3 -B
"""Test for setartree.dgp_sim."""
import numpy as np
import pytest

import setartree.dgp_sim
import setartree.shared


def _config(**kwargs):
    return setartree.dgp_sim.DgpConfig(**kwargs)


def _values(**kwargs):
    return setartree.dgp_sim.simulate(_config(**kwargs)).series[0].values


def test_logistic_map_iteration():
    values = _values(kind='chaotic_logistic', n_series=1, length=3, initial_values=(0.2,))
    np.testing.assert_allclose(values, [0.2, 0.64, 0.9216], rtol=1e-12)


def test_logistic_map_from_one_half():
    values = _values(kind='chaotic_logistic', n_series=1, length=4, initial_values=(0.5,))
    np.testing.assert_array_equal(values, [0.5, 1.0, 0.0, 0.0])


def test_logistic_stays_in_the_unit_interval():
    collection = setartree.dgp_sim.simulate(
        _config(kind='chaotic_logistic', n_series=5, length=300, seed=9, noise_sd=0.01))
    for cur in collection:
        assert np.all((cur.values >= 0.0) & (cur.values <= 1.0))


def test_logistic_rejects_bad_rate():
    with pytest.raises(setartree.shared.UsageError):
        setartree.dgp_sim.simulate(_config(kind='chaotic_logistic', r=4.5))


def test_mackey_glass_without_dynamics_is_constant():
    values = _values(kind='mackey_glass', n_series=1, length=30, beta=0.0, gamma=0.0,
                     warmup=10, initial_values=(1.2,))
    np.testing.assert_array_equal(values, np.full(30, 1.2))


def test_mackey_glass_stays_bounded():
    collection = setartree.dgp_sim.simulate(
        _config(kind='mackey_glass', n_series=3, length=200, warmup=100, seed=4))
    for cur in collection:
        assert len(cur) == 200
        assert np.all((cur.values > 0.0) & (cur.values < 2.0))


def test_mackey_glass_converges_when_halving_the_step():
    common = dict(kind='mackey_glass', n_series=1, length=40, warmup=0, initial_values=(1.2,))
    coarse = _values(dt=1.0, **common)
    fine = _values(dt=0.5, **common)
    reference = _values(dt=0.125, **common)
    assert np.max(np.abs(fine - reference)) < np.max(np.abs(coarse - reference))


def test_mackey_glass_rejects_off_grid_delay():
    with pytest.raises(setartree.shared.UsageError):
        setartree.dgp_sim.simulate(_config(kind='mackey_glass', tau=17.0, dt=0.3))


def test_setar2_hand_iteration():
    values = _values(kind='setar2', n_series=1, length=4, burn_in=0, initial_values=(0.2,),
                     low_coefficients=(0.3, 0.6), high_coefficients=(0.8, -0.5))
    np.testing.assert_allclose(values, [0.2, 0.42, 0.552, 0.524], rtol=1e-12)


def test_setar2_regime_follows_the_threshold_lag():
    # order 2, the regime is picked by y[t-2]
    values = _values(kind='setar2', n_series=1, length=3, burn_in=0, initial_values=(0.9, 0.1),
                     low_coefficients=(1.0, 0.0, 0.0), high_coefficients=(2.0, 0.0, 0.0),
                     threshold_lag=2)
    assert values[2] == 2.0


def test_setar2_divergence():
    with pytest.raises(setartree.dgp_sim.DivergedSeries):
        setartree.dgp_sim.simulate(_config(
            kind='setar2', n_series=1, length=100, burn_in=0, initial_values=(1.0,),
            low_coefficients=(0.0, 2.0), high_coefficients=(0.0, 2.0)))


def test_config_validation():
    with pytest.raises(setartree.shared.UsageError):
        _config(length=1)
    with pytest.raises(setartree.shared.UsageError):
        _config(n_series=0)
    with pytest.raises(setartree.shared.UsageError):
        _config(kind='setar2', low_coefficients=(0.1, 0.2), high_coefficients=(0.1,))
    with pytest.raises(setartree.shared.UsageError):
        _config(kind='setar2', threshold_lag=2)
    with pytest.raises(ValueError):
        _config(kind='brownian')


def test_same_seed_same_collection():
    config = _config(kind='chaotic_logistic', n_series=4, length=50, seed=11, noise_sd=0.01)
    first = setartree.dgp_sim.simulate(config)
    second = setartree.dgp_sim.simulate(config)
    assert first.ids == ['T1', 'T2', 'T3', 'T4']
    for left, right in zip(first, second):
        np.testing.assert_array_equal(left.values, right.values)
    other = setartree.dgp_sim.simulate(
        _config(kind='chaotic_logistic', n_series=4, length=50, seed=12, noise_sd=0.01))
    assert not np.array_equal(first.series[0].values, other.series[0].values)


def test_series_streams_are_independent_of_count():
    small = setartree.dgp_sim.simulate(_config(kind='setar2', n_series=2, length=20, seed=3))
    large = setartree.dgp_sim.simulate(_config(kind='setar2', n_series=5, length=20, seed=3))
    np.testing.assert_array_equal(small.series[1].values, large.series[1].values)


def test_kind_from_option():
    assert setartree.dgp_sim.DgpKind.from_option('mackey-glass') is \
        setartree.dgp_sim.DgpKind.mackey_glass


if __name__ == '__main__':
    pass
