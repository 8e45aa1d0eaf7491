"""
Series collections, the embedded lag matrix and the rolling test set.

Lag columns are ordered L1..Ln with L1 the most recent value. Covariate
columns follow the lags and are aligned to the time index of the target.
"""
import dataclasses
import enum
import logging
import math

import numpy as np

import setartree.shared

_LOGGER = logging.getLogger(__name__)


class SeriesTooShort(setartree.shared.DataError):

    def __init__(self, message, series_id):
        super().__init__(message)
        self.series_id = series_id


class CovariateMisaligned(setartree.shared.DataError):

    def __init__(self, message, name, series_id):
        super().__init__(message)
        self.name = name
        self.series_id = series_id


class UnknownCategory(setartree.shared.DataError):

    def __init__(self, message, name, value):
        super().__init__(message)
        self.name = name
        self.value = value


class MissingFutureCovariates(setartree.shared.DataError):

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class MissingValues(setartree.shared.DataError):
    pass


class DuplicateSeries(setartree.shared.DataError):
    pass


class CovariateKind(enum.Enum):
    numeric = 'numeric'
    categorical = 'categorical'


class FrequencyHint(enum.Enum):
    daily = 'daily'
    monthly = 'monthly'
    quarterly = 'quarterly'
    none = 'none'

    @property
    def seasonality(self):
        return _SEASONALITY[self]


_SEASONALITY = {
    FrequencyHint.daily: 7,
    FrequencyHint.monthly: 12,
    FrequencyHint.quarterly: 4,
    FrequencyHint.none: None,
}


@dataclasses.dataclass(frozen=True)
class TimeSeries:
    series_id: str
    values: np.ndarray
    # name -> per-timestep values, same length as `values`
    covariates: dict = dataclasses.field(default_factory=dict)
    # name -> values for the steps after the end of `values`
    future_covariates: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)
        if not np.all(np.isfinite(values)):
            raise MissingValues(f'Series has missing or non-finite values: {self.series_id}')
        for name, cov_values in self.covariates.items():
            if len(cov_values) != len(values):
                raise CovariateMisaligned(
                    f'Covariate {name} has {len(cov_values)} values, series '
                    f'{self.series_id} has {len(values)}',
                    name, self.series_id)

    def __len__(self):
        return len(self.values)

    def future_length(self):
        if not self.future_covariates:
            return 0
        return min(len(cur) for cur in self.future_covariates.values())


@dataclasses.dataclass(frozen=True)
class SeriesCollection:
    series: tuple
    covariate_kinds: dict = dataclasses.field(default_factory=dict)
    frequency_hint: FrequencyHint = FrequencyHint.none

    def __post_init__(self):
        object.__setattr__(self, 'series', tuple(self.series))
        seen = set()
        for cur in self.series:
            if cur.series_id in seen:
                raise DuplicateSeries(f'Duplicate series id: {cur.series_id}')
            seen.add(cur.series_id)
            for name in self.covariate_kinds:
                if name not in cur.covariates:
                    raise CovariateMisaligned(
                        f'Covariate {name} missing for series {cur.series_id}',
                        name, cur.series_id)

    def __len__(self):
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    @property
    def ids(self):
        return [cur.series_id for cur in self.series]

    def get(self, series_id):
        for cur in self.series:
            if cur.series_id == series_id:
                return cur
        return None

    def split_holdout(self, horizon):
        """
        Hold out the last `horizon` points of every series.

        The held-out covariate values become the training part's future
        covariates, so the training part can be forecast directly.
        """
        train, test = [], []
        for cur in self.series:
            if len(cur) <= horizon:
                raise SeriesTooShort(
                    f'Series {cur.series_id} has {len(cur)} values, cannot hold out {horizon}',
                    cur.series_id)
            cut = len(cur) - horizon
            train_cov = {name: tuple(vals[:cut]) for name, vals in cur.covariates.items()}
            test_cov = {name: tuple(vals[cut:]) for name, vals in cur.covariates.items()}
            train.append(TimeSeries(
                series_id=cur.series_id,
                values=cur.values[:cut],
                covariates=train_cov,
                future_covariates=test_cov,
            ))
            test.append(TimeSeries(
                series_id=cur.series_id,
                values=cur.values[cut:],
                covariates=test_cov,
                future_covariates=dict(cur.future_covariates),
            ))
        return (
            dataclasses.replace(self, series=tuple(train)),
            dataclasses.replace(self, series=tuple(test)),
        )


@dataclasses.dataclass(frozen=True)
class CovariateSpec:
    name: str
    kind: CovariateKind
    categories: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'kind', CovariateKind(self.kind))
        object.__setattr__(self, 'categories', tuple(self.categories))
        if len(set(self.categories)) != len(self.categories):
            raise setartree.shared.DataError(f'Duplicate categories for covariate: {self.name}')

    @property
    def width(self):
        if self.kind is CovariateKind.categorical:
            return len(self.categories)
        return 1

    @property
    def column_names(self):
        if self.kind is CovariateKind.categorical:
            return [f'{self.name}={cur}' for cur in self.categories]
        return [self.name]

    def to_record(self):
        return {
            'name': self.name,
            'kind': self.kind.value,
            'categories': list(self.categories),
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            name=record['name'],
            kind=record['kind'],
            categories=record.get('categories', ()),
        )


def build_covariate_specs(collection):
    """Freeze the covariate layout of a training collection."""
    specs = []
    for name, kind in collection.covariate_kinds.items():
        kind = CovariateKind(kind)
        categories = ()
        if kind is CovariateKind.categorical:
            observed = set()
            for cur in collection:
                observed.update(str(val) for val in cur.covariates[name])
            categories = tuple(sorted(observed))
        specs.append(CovariateSpec(name=name, kind=kind, categories=categories))
    _LOGGER.debug('Covariate specs: %s', specs)
    return specs


@dataclasses.dataclass(frozen=True)
class InstanceRow:
    predictors: np.ndarray
    target: float
    series_id: str
    target_time: int


@dataclasses.dataclass(frozen=True)
class EmbeddedMatrix:
    predictors: np.ndarray
    targets: np.ndarray
    series_ids: tuple
    target_times: np.ndarray
    column_names: tuple
    n_lags: int
    covariate_specs: tuple = ()

    def __post_init__(self):
        predictors = np.array(self.predictors, dtype=float, ndmin=2)
        if predictors.size == 0:
            predictors = predictors.reshape(0, len(self.column_names))
        targets = np.array(self.targets, dtype=float).reshape(-1)
        times = np.array(self.target_times, dtype=np.int64).reshape(-1)
        for arr in (predictors, targets, times):
            arr.flags.writeable = False
        object.__setattr__(self, 'predictors', predictors)
        object.__setattr__(self, 'targets', targets)
        object.__setattr__(self, 'target_times', times)
        object.__setattr__(self, 'series_ids', tuple(self.series_ids))
        object.__setattr__(self, 'column_names', tuple(self.column_names))
        object.__setattr__(self, 'covariate_specs', tuple(self.covariate_specs))
        if predictors.shape[1] != len(self.column_names):
            raise setartree.shared.DimensionMismatch(
                f'{predictors.shape[1]} predictor columns, {len(self.column_names)} names')
        if not (len(targets) == len(times) == len(self.series_ids) == predictors.shape[0]):
            raise setartree.shared.DimensionMismatch('Row arrays have different lengths')

    def __len__(self):
        return self.predictors.shape[0]

    @property
    def n_columns(self):
        return self.predictors.shape[1]

    @property
    def rows(self):
        for idx in range(len(self)):
            yield InstanceRow(
                predictors=self.predictors[idx],
                target=float(self.targets[idx]),
                series_id=self.series_ids[idx],
                target_time=int(self.target_times[idx]),
            )

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return dataclasses.replace(
            self,
            predictors=self.predictors[index],
            targets=self.targets[index],
            series_ids=tuple(self.series_ids[cur] for cur in index),
            target_times=self.target_times[index],
        )


@dataclasses.dataclass(frozen=True)
class ForecastMatrix:
    """Per-series forecasts, one column per step ahead."""
    series_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        if values.size == 0:
            values = values.reshape(len(self.series_ids), 0)
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'series_ids', tuple(self.series_ids))
        if values.shape[0] != len(self.series_ids):
            raise setartree.shared.DimensionMismatch(
                f'{values.shape[0]} forecast rows for {len(self.series_ids)} series')

    @property
    def horizon(self):
        return self.values.shape[1]

    def for_series(self, series_id):
        return self.values[self.series_ids.index(series_id)]

    @classmethod
    def mean_of(cls, matrices):
        """Elementwise mean of forecasts over the same series and horizon."""
        matrices = list(matrices)
        first = matrices[0]
        for cur in matrices[1:]:
            if cur.series_ids != first.series_ids or cur.values.shape != first.values.shape:
                raise setartree.shared.DimensionMismatch('Forecast matrices do not line up')
        stacked = np.stack([cur.values for cur in matrices])
        return cls(series_ids=first.series_ids, values=stacked.mean(axis=0))


def lag_column_names(lag):
    return [f'L{cur}' for cur in range(1, lag + 1)]


def _column_names(lag, covariates):
    names = lag_column_names(lag)
    for spec in covariates:
        names.extend(spec.column_names)
    return names


def encode_covariates(raw, spec):
    """Encode one covariate value: numeric passes through, categorical is one-hot."""
    if spec.kind is CovariateKind.numeric:
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise setartree.shared.DataError(f'Covariate {spec.name} is not numeric: {raw!r}')
        if not math.isfinite(value):
            raise MissingValues(f'Covariate {spec.name} has a missing value')
        return [value]
    label = str(raw)
    try:
        position = spec.categories.index(label)
    except ValueError:
        raise UnknownCategory(
            f'Unknown category for covariate {spec.name}: {label}', spec.name, label)
    encoded = [0.0] * len(spec.categories)
    encoded[position] = 1.0
    return encoded


def _encode_row(raw_values, covariates):
    encoded = []
    for raw, spec in zip(raw_values, covariates):
        encoded.extend(encode_covariates(raw, spec))
    return encoded


def _check_lag(lag):
    if lag < 1:
        raise setartree.shared.UsageError(f'Lag must be >= 1: {lag}')


def create_input_matrix(collection, lag, covariates=None):
    """
    Build the pooled embedded matrix: one row per (lag window -> next value).

    Rows are ordered by series (collection order) then time.
    """
    _check_lag(lag)
    covariates = tuple(covariates or ())
    predictors, targets, series_ids, times = [], [], [], []
    for cur in collection:
        length = len(cur)
        if length <= lag:
            raise SeriesTooShort(
                f'Series {cur.series_id} has {length} values, needs at least {lag + 1}',
                cur.series_id)
        windows = np.lib.stride_tricks.sliding_window_view(cur.values[:-1], lag)
        block = windows[:, ::-1]
        if covariates:
            encoded = []
            for time_idx in range(lag, length):
                raw = [cur.covariates[spec.name][time_idx] for spec in covariates]
                encoded.append(_encode_row(raw, covariates))
            block = np.hstack([block, np.array(encoded, dtype=float)])
        predictors.append(block)
        targets.append(cur.values[lag:])
        series_ids.extend([cur.series_id] * (length - lag))
        times.append(np.arange(lag, length))
    names = _column_names(lag, covariates)
    if not predictors:
        raise setartree.shared.EmptyTrainingSet('No series to build the embedded matrix from')
    matrix = EmbeddedMatrix(
        predictors=np.vstack(predictors),
        targets=np.concatenate(targets),
        series_ids=series_ids,
        target_times=np.concatenate(times),
        column_names=names,
        n_lags=lag,
        covariate_specs=covariates,
    )
    _LOGGER.debug('Embedded matrix: %d rows x %d columns', len(matrix), matrix.n_columns)
    return matrix


def _future_covariates(cur, covariates, step):
    """Encoded covariates for forecast step `step` (0 is the first step)."""
    raw = []
    for spec in covariates:
        future = cur.future_covariates.get(spec.name)
        if future is None or len(future) <= step:
            raise MissingFutureCovariates(
                f'No future value of covariate {spec.name} for series {cur.series_id} '
                f'at step {step + 1}', step + 1)
        raw.append(future[step])
    return _encode_row(raw, covariates)


def create_test_set(collection, lag, covariates=None):
    """One row per series holding its final `lag` values, target unset."""
    _check_lag(lag)
    covariates = tuple(covariates or ())
    rows, series_ids, times = [], [], []
    for cur in collection:
        if len(cur) < lag:
            raise SeriesTooShort(
                f'Series {cur.series_id} has {len(cur)} values, needs at least {lag}',
                cur.series_id)
        row = list(cur.values[-lag:][::-1])
        if covariates:
            row.extend(_future_covariates(cur, covariates, 0))
        rows.append(row)
        series_ids.append(cur.series_id)
        times.append(len(cur))
    names = _column_names(lag, covariates)
    return EmbeddedMatrix(
        predictors=np.array(rows, dtype=float).reshape(len(rows), len(names)),
        targets=np.full(len(rows), np.nan),
        series_ids=series_ids,
        target_times=times,
        column_names=names,
        n_lags=lag,
        covariate_specs=covariates,
    )


def update_test_set(test, step_forecasts, collection=None, step=1):
    """
    Shift every row's lags by one and put that series' forecast in L1.

    `step` is the 0-based forecast step the updated rows will predict; it
    selects the future covariates when the test set carries covariates.
    """
    forecasts = np.asarray(step_forecasts, dtype=float).reshape(-1)
    if len(forecasts) != len(test):
        raise setartree.shared.DimensionMismatch(
            f'{len(forecasts)} forecasts for {len(test)} test rows')
    lag = test.n_lags
    predictors = np.array(test.predictors, dtype=float)
    predictors[:, 1:lag] = test.predictors[:, :lag - 1]
    predictors[:, 0] = forecasts
    if test.covariate_specs:
        if collection is None:
            raise MissingFutureCovariates(
                f'Covariates configured but none supplied for step {step + 1}', step + 1)
        for idx, series_id in enumerate(test.series_ids):
            cur = collection.get(series_id)
            if cur is None:
                raise MissingFutureCovariates(
                    f'No covariates for series {series_id} at step {step + 1}', step + 1)
            predictors[idx, lag:] = _future_covariates(cur, test.covariate_specs, step)
    return dataclasses.replace(
        test,
        predictors=predictors,
        target_times=test.target_times + 1,
    )


if __name__ == '__main__':
    pass
