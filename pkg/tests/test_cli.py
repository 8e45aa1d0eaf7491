#!/usr/bin/env python3 -B
"""Test for setartree.cli."""
import configparser
import logging

import pytest

import setartree.cli
import setartree.series_io
import setartree.shared


@pytest.fixture
def mock_get_config_object(mocker):
    mock_get_config = mocker.patch.object(setartree.shared.GlobalConfig, '_get_config_object')
    mock_get_config.return_value = configparser.ConfigParser()
    return mock_get_config


@pytest.fixture
def package_logger():
    logger = logging.getLogger('setartree')
    level = logger.level
    yield logger
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


@pytest.fixture
def series_file(tmp_path, mock_get_config_object):
    path = tmp_path / 'series.txt'
    setartree.cli.main([
        'simulate', '--out', str(path), '--kind', 'setar2', '--n', '6', '--length', '50',
        '--seed', '1', '--noise-sd', '0.1', '--threads', '1'])
    return path


def test_simulate(series_file):
    collection = setartree.series_io.read_series(series_file)
    assert len(collection) == 6
    assert len(collection.series[0]) == 50


def test_default_command_is_run(series_file, tmp_path):
    out = tmp_path / 'forecasts.csv'
    report = tmp_path / 'report.json'
    setartree.cli.main([
        '--input', str(series_file), '--horizon', '4', '--lag', '2', '--threads', '1',
        '--out', str(out), '--report', str(report)])
    forecasts = setartree.series_io.read_forecasts(out)
    assert forecasts.horizon == 4
    assert len(forecasts.series_ids) == 6
    assert report.exists()


def test_forest_flags(series_file, tmp_path):
    out = tmp_path / 'forecasts.csv'
    setartree.cli.main([
        'run', '--input', str(series_file), '--horizon', '3', '--lag', '2', '--forest',
        '--trees', '2', '--randomize', 'error-red', '--combine', 'per-step',
        '--stopping', 'lin-test', '--threads', '2', '--out', str(out)])
    assert setartree.series_io.read_forecasts(out).horizon == 3


def test_usage_error_exit(mock_get_config_object, capsys):
    with pytest.raises(SystemExit) as err:
        setartree.cli.main(['train', '--input', 'series.txt'])
    assert err.value.code == 2
    assert capsys.readouterr().err == 'error[usage]: train needs --model-out\n'


def test_missing_input_file(mock_get_config_object, tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        setartree.cli.main([
            'run', '--input', str(tmp_path / 'absent.txt'), '--horizon', '3'])
    assert err.value.code == 2
    assert capsys.readouterr().err.startswith('error[usage]: Input file does not exist')


@pytest.mark.parametrize('name, content', [
    ('series.txt', b'T1:1,2,oops\n'),
    ('series.txt', b'T1:1,2,\xff3\n'),
    ('series.csv', b'series_id,timestep,value\nA,0,1.0,7\nA,1,2.0,8\n'),
])
def test_data_error_exit(mock_get_config_object, tmp_path, capsys, name, content):
    path = tmp_path / name
    path.write_bytes(content)
    with pytest.raises(SystemExit) as err:
        setartree.cli.main(['run', '--input', str(path), '--horizon', '1', '--threads', '1'])
    assert err.value.code == 3
    stderr = capsys.readouterr().err
    assert stderr.startswith('error[data]:')
    assert stderr.count('\n') == 1


def test_bad_choice_is_rejected_by_the_parser(mock_get_config_object):
    with pytest.raises(SystemExit) as err:
        setartree.cli.main(['run', '--stopping', 'gini'])
    assert err.value.code == 2


def test_log_level(mock_get_config_object, package_logger):
    cli = setartree.cli.SetarCli()
    cli.parse_args(['show-model', '--model', 'm.yaml', '--log-level', 'debug'])
    assert package_logger.level == logging.DEBUG
    assert cli.command == 'show-model'


def test_log_level_from_config(mock_get_config_object, package_logger):
    config = configparser.ConfigParser()
    config.read_dict({'default': {'log_level': 'info'}})
    mock_get_config_object.return_value = config
    cli = setartree.cli.SetarCli()
    cli.parse_args(['show-model', '--model', 'm.yaml'])
    assert package_logger.level == logging.INFO


if __name__ == '__main__':
    pass
