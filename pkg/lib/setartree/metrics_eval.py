"""
msMAPE and MASE per series, dataset aggregates, and the lag-count heuristics.
"""
import dataclasses
import logging
import math
import typing

import numpy as np

import setartree.shared

_LOGGER = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1


class LengthMismatch(setartree.shared.DataError):
    pass


class MissingActuals(setartree.shared.DataError):

    def __init__(self, message, series_id):
        super().__init__(message)
        self.series_id = series_id


class ZeroDenominator(Exception):
    pass


def _pair(forecasts, actuals):
    forecasts = np.asarray(forecasts, dtype=float).reshape(-1)
    actuals = np.asarray(actuals, dtype=float).reshape(-1)
    if forecasts.shape != actuals.shape or forecasts.size == 0:
        raise LengthMismatch(f'{forecasts.size} forecasts against {actuals.size} actuals')
    return forecasts, actuals


def msmape(forecasts, actuals, epsilon=DEFAULT_EPSILON):
    """Symmetric MAPE with the denominator floored at (0.5 + epsilon) / 2, in percent."""
    forecasts, actuals = _pair(forecasts, actuals)
    denominator = np.maximum(np.abs(actuals) + np.abs(forecasts) + epsilon, 0.5 + epsilon) / 2.0
    return float(100.0 * np.mean(np.abs(forecasts - actuals) / denominator))


def mase(forecasts, actuals, training, seasonality):
    """Forecast MAE scaled by the in-sample seasonal-naive MAE."""
    forecasts, actuals = _pair(forecasts, actuals)
    training = np.asarray(training, dtype=float).reshape(-1)
    if seasonality < 1 or training.size <= seasonality:
        raise LengthMismatch(
            f'Training length {training.size} must exceed the seasonality {seasonality}')
    scale = np.mean(np.abs(training[seasonality:] - training[:-seasonality]))
    if scale == 0.0:
        raise ZeroDenominator('Training series has a zero seasonal-naive error')
    return float(np.mean(np.abs(forecasts - actuals)) / scale)


def _round_up_to_five(value):
    return int(math.ceil(value / 5.0 - 1e-12) * 5)


def heuristic_lags(seasonality, horizon):
    """
    seasonality x 1.25 rounded up to a multiple of 5; when that is below 10
    (or there is no seasonality) use horizon x 1.25, rounded the same way.
    """
    if horizon < 1:
        raise ValueError(f'Horizon must be >= 1: {horizon}')
    if seasonality:
        lags = _round_up_to_five(seasonality * 1.25)
        if lags >= 10:
            return lags
    return max(5, _round_up_to_five(horizon * 1.25))


@dataclasses.dataclass(frozen=True)
class SeriesScore:
    series_id: str
    msmape: float
    mase: typing.Optional[float]


@dataclasses.dataclass(frozen=True)
class EvaluationReport:
    per_series: tuple
    mean_msmape: float
    median_msmape: float
    mean_mase: typing.Optional[float]
    median_mase: typing.Optional[float]
    horizon: int
    seasonality: int
    epsilon: float
    undefined_mase: tuple = ()

    @property
    def aggregates(self):
        return {
            'mean_msmape': self.mean_msmape,
            'median_msmape': self.median_msmape,
            'mean_mase': self.mean_mase,
            'median_mase': self.median_mase,
        }

    def to_record(self):
        return {
            'config': {
                'horizon': self.horizon,
                'seasonality': self.seasonality,
                'epsilon': self.epsilon,
            },
            'per_series': [dataclasses.asdict(cur) for cur in self.per_series],
            'aggregates': self.aggregates,
            'undefined_mase': list(self.undefined_mase),
        }


def _mean_and_median(values):
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    return float(np.mean(arr)), float(np.median(arr))


def evaluate(forecasts, actuals, training, seasonality, epsilon=DEFAULT_EPSILON):
    """
    Score a ForecastMatrix against held-out actuals.

    Series whose MASE is undefined (zero seasonal-naive error) are left out of
    the MASE aggregates and listed in `undefined_mase`.
    """
    horizon = forecasts.horizon
    scores = []
    undefined = []
    for idx, series_id in enumerate(forecasts.series_ids):
        actual_series = actuals.get(series_id)
        if actual_series is None or len(actual_series) < horizon:
            raise MissingActuals(f'No {horizon} actual values for series {series_id}', series_id)
        train_series = training.get(series_id)
        if train_series is None:
            raise MissingActuals(f'No training values for series {series_id}', series_id)
        predicted = forecasts.values[idx]
        observed = actual_series.values[:horizon]
        series_mase = None
        try:
            series_mase = mase(predicted, observed, train_series.values, seasonality)
        except ZeroDenominator:
            _LOGGER.warning('MASE undefined for series %s, excluded from aggregates', series_id)
            undefined.append(series_id)
        scores.append(SeriesScore(
            series_id=series_id,
            msmape=msmape(predicted, observed, epsilon),
            mase=series_mase,
        ))
    mean_msmape, median_msmape = _mean_and_median([cur.msmape for cur in scores])
    mean_mase, median_mase = _mean_and_median(
        [cur.mase for cur in scores if cur.mase is not None])
    return EvaluationReport(
        per_series=tuple(scores),
        mean_msmape=mean_msmape,
        median_msmape=median_msmape,
        mean_mase=mean_mase,
        median_mase=median_mase,
        horizon=horizon,
        seasonality=seasonality,
        epsilon=epsilon,
        undefined_mase=tuple(undefined),
    )


if __name__ == '__main__':
    pass
