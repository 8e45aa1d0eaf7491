"""
Reading and writing series collections and forecast files.

Format A (values file): one series per line, ``series_id:v1,v2,...``.
Format B (long CSV): ``series_id,timestep,value[,cov1,...]`` with 0-based
contiguous timesteps per series. Trailing rows with an empty value but
covariates present are the series' future covariate values.
"""
import configparser
import io
import logging
import math
import pathlib
import warnings

import numpy as np
import pandas as pd

import setartree.data_model
import setartree.shared

_LOGGER = logging.getLogger(__name__)

_LONG_COLUMNS = ['series_id', 'timestep', 'value']
_COVARIATE_SECTION = 'covariates'


class DataFormatError(setartree.shared.DataError):
    pass


def read_covariate_kinds(path):
    """Parse ``cov.<name>.kind=numeric|categorical`` lines."""
    path = pathlib.Path(path)
    conf = configparser.ConfigParser()
    conf.optionxform = str
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise setartree.shared.ConfigError(f'Covariate config does not exist: {path}')
    except UnicodeDecodeError as exc:
        raise setartree.shared.ConfigError(f'Covariate config {path} is not UTF-8: {exc.reason}')
    try:
        conf.read_string(f'[{_COVARIATE_SECTION}]\n{text}', source=str(path))
    except configparser.Error as exc:
        raise setartree.shared.ConfigError(f'Cannot parse covariate config {path}: {exc}')
    kinds = {}
    for key, value in conf.items(_COVARIATE_SECTION):
        parts = key.split('.')
        if len(parts) != 3 or parts[0] != 'cov' or parts[2] != 'kind':
            raise setartree.shared.ConfigError(f'Unknown covariate config key: {key}')
        try:
            kinds[parts[1]] = setartree.data_model.CovariateKind(value.strip())
        except ValueError:
            raise setartree.shared.ConfigError(f'Unknown covariate kind: {key}={value}')
    return kinds


def _parse_value(raw, series_id, line_no):
    try:
        value = float(raw)
    except ValueError:
        raise DataFormatError(f'Line {line_no}: bad value {raw!r} in series {series_id}')
    if not math.isfinite(value):
        raise setartree.data_model.MissingValues(
            f'Line {line_no}: missing value in series {series_id}')
    return value


def read_values_file(path, frequency_hint=setartree.data_model.FrequencyHint.none):
    path = pathlib.Path(path)
    _LOGGER.debug('Reading values file: %s', path)
    series = []
    with path.open('rb') as fp:
        for line_no, raw_line in enumerate(fp, start=1):
            try:
                line = raw_line.decode('utf-8').strip()
            except UnicodeDecodeError as exc:
                raise DataFormatError(f'{path}:{line_no}: not UTF-8 text ({exc.reason})')
            if not line:
                continue
            series_id, sep, body = line.partition(':')
            if not sep or not series_id:
                raise DataFormatError(f'Line {line_no}: expected "series_id:v1,v2,..."')
            raw_values = body.split(',') if body else []
            values = [_parse_value(cur.strip(), series_id, line_no) for cur in raw_values]
            series.append(setartree.data_model.TimeSeries(series_id=series_id, values=values))
    return setartree.data_model.SeriesCollection(series=series, frequency_hint=frequency_hint)


def _covariate_column(frame, name, kind):
    if kind is setartree.data_model.CovariateKind.categorical:
        return [str(cur) for cur in frame[name]]
    try:
        return [float(cur) for cur in frame[name]]
    except ValueError:
        raise DataFormatError(f'Covariate {name} has non-numeric values')


def read_long_csv(path, covariate_kinds=None,
                  frequency_hint=setartree.data_model.FrequencyHint.none):
    path = pathlib.Path(path)
    _LOGGER.debug('Reading long CSV: %s', path)
    try:
        with warnings.catch_warnings():
            # Rows longer than the header would otherwise be cut short.
            warnings.simplefilter('error', pd.errors.ParserWarning)
            frame = pd.read_csv(
                path, dtype={'series_id': str}, index_col=False,
                float_precision='round_trip', keep_default_na=False,
                na_values={'value': ['']})
    except (pd.errors.ParserError, pd.errors.ParserWarning, pd.errors.EmptyDataError) as exc:
        raise DataFormatError(f'{path}: {exc}')
    except UnicodeDecodeError as exc:
        raise DataFormatError(f'{path}: not UTF-8 text ({exc.reason})')
    missing = [cur for cur in _LONG_COLUMNS if cur not in frame.columns]
    if missing:
        raise DataFormatError(f'{path}: missing columns {missing}')
    for name in ('timestep', 'value'):
        if not pd.api.types.is_numeric_dtype(frame[name]):
            raise DataFormatError(f'{path}: column {name} has non-numeric entries')
    cov_names = [cur for cur in frame.columns if cur not in _LONG_COLUMNS]
    kinds = dict(covariate_kinds or {})
    for name in kinds:
        if name not in cov_names:
            raise setartree.shared.ConfigError(f'Configured covariate not in {path}: {name}')
    kinds = {
        name: kinds.get(name, setartree.data_model.CovariateKind.numeric) for name in cov_names
    }
    series = []
    for series_id, group in frame.groupby('series_id', sort=False):
        group = group.sort_values('timestep', kind='stable')
        steps = group['timestep'].to_numpy()
        if not np.array_equal(steps, np.arange(len(steps))):
            raise DataFormatError(f'Series {series_id}: timesteps are not 0-based and contiguous')
        observed = group['value'].notna().to_numpy()
        n_observed = int(observed.sum())
        if not observed[:n_observed].all():
            raise setartree.data_model.MissingValues(f'Series {series_id} has missing values')
        if n_observed < len(group) and not kinds:
            raise setartree.data_model.MissingValues(f'Series {series_id} has missing values')
        past = group.iloc[:n_observed]
        future = group.iloc[n_observed:]
        series.append(setartree.data_model.TimeSeries(
            series_id=series_id,
            values=past['value'].to_numpy(dtype=float),
            covariates={name: tuple(_covariate_column(past, name, kind))
                        for name, kind in kinds.items()},
            future_covariates={name: tuple(_covariate_column(future, name, kind))
                               for name, kind in kinds.items()} if len(future) else {},
        ))
    return setartree.data_model.SeriesCollection(
        series=series, covariate_kinds=kinds, frequency_hint=frequency_hint)


def read_series(path, covariate_config=None,
                frequency_hint=setartree.data_model.FrequencyHint.none):
    """Dispatch on the extension: ``.csv`` is the long format, anything else format A."""
    path = pathlib.Path(path)
    if not path.exists():
        raise setartree.shared.UsageError(f'Input file does not exist: {path}')
    if path.suffix.lower() == '.csv':
        kinds = read_covariate_kinds(covariate_config) if covariate_config else None
        return read_long_csv(path, kinds, frequency_hint)
    if covariate_config:
        raise setartree.shared.UsageError('Covariates need the long CSV input format')
    return read_values_file(path, frequency_hint)


def format_values(collection):
    lines = []
    for cur in collection:
        lines.append('{}:{}'.format(cur.series_id, ','.join(repr(float(v)) for v in cur.values)))
    return '\n'.join(lines) + '\n'


def format_long_csv(collection):
    names = list(collection.covariate_kinds)
    records = []
    for cur in collection:
        for step, value in enumerate(cur.values):
            row = [cur.series_id, step, repr(float(value))]
            row.extend(cur.covariates[name][step] for name in names)
            records.append(row)
        for offset in range(cur.future_length()):
            row = [cur.series_id, len(cur) + offset, '']
            row.extend(cur.future_covariates[name][offset] for name in names)
            records.append(row)
    frame = pd.DataFrame(records, columns=_LONG_COLUMNS + names)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()


def write_series(collection, path):
    path = pathlib.Path(path)
    if path.suffix.lower() == '.csv':
        text = format_long_csv(collection)
    else:
        if collection.covariate_kinds:
            raise setartree.shared.UsageError('Covariates need the long CSV output format')
        text = format_values(collection)
    setartree.shared.atomic_write(path, text)
    _LOGGER.debug('Wrote %d series: %s', len(collection), path)


def format_forecasts(forecasts):
    columns = [f'h{cur}' for cur in range(1, forecasts.horizon + 1)]
    frame = pd.DataFrame(
        [[repr(float(v)) for v in row] for row in forecasts.values],
        columns=columns,
    )
    frame.insert(0, 'series_id', list(forecasts.series_ids))
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()


def write_forecasts(forecasts, path):
    setartree.shared.atomic_write(path, format_forecasts(forecasts))


def read_forecasts(path):
    frame = pd.read_csv(path, dtype={'series_id': str}, float_precision='round_trip')
    if 'series_id' not in frame.columns:
        raise DataFormatError(f'{path}: missing series_id column')
    steps = [cur for cur in frame.columns if cur != 'series_id']
    expected = [f'h{cur}' for cur in range(1, len(steps) + 1)]
    if steps != expected:
        raise DataFormatError(f'{path}: expected columns {expected}, found {steps}')
    return setartree.data_model.ForecastMatrix(
        series_ids=list(frame['series_id']),
        values=frame[steps].to_numpy(dtype=float),
    )


if __name__ == '__main__':
    pass
