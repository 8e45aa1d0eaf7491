"""
Simulated series collections: the chaotic logistic map, the Mackey-Glass delay
equation and a 2-regime SETAR process.

Every series i draws from its own Philox stream seeded with
derive_seed(config.seed, i), so a config always yields the same collection.
"""
import dataclasses
import enum
import logging
import typing

import numpy as np

import setartree.data_model
import setartree.shared

_LOGGER = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6


class DivergedSeries(setartree.shared.NumericalError):
    pass


class DgpKind(enum.Enum):
    chaotic_logistic = 'chaotic_logistic'
    mackey_glass = 'mackey_glass'
    setar2 = 'setar2'

    @classmethod
    def from_option(cls, option):
        return cls(str(option).replace('-', '_'))


@dataclasses.dataclass(frozen=True)
class DgpConfig:
    kind: DgpKind = DgpKind.chaotic_logistic
    n_series: int = 100
    length: int = 600
    seed: int = 0
    noise_sd: float = 0.0
    # Per-series starting values (logistic: x0, mackey-glass: history level,
    # setar2: the first lags, oldest first). Drawn from the stream when None.
    initial_values: typing.Optional[tuple] = None
    # chaotic logistic
    r: float = 4.0
    # mackey-glass
    beta: float = 0.2
    gamma: float = 0.1
    n_exp: float = 10.0
    tau: float = 17.0
    dt: float = 1.0
    warmup: int = 500
    # setar2: intercept first, then one coefficient per lag
    low_coefficients: tuple = (0.3, 0.6)
    high_coefficients: tuple = (0.8, -0.5)
    threshold_lag: int = 1
    threshold: float = 0.5
    burn_in: int = 100

    def __post_init__(self):
        object.__setattr__(self, 'kind', DgpKind(self.kind))
        if self.length < 2:
            raise setartree.shared.UsageError(f'Series length must be >= 2: {self.length}')
        if self.n_series < 1:
            raise setartree.shared.UsageError(f'Need at least one series: {self.n_series}')
        if self.kind is DgpKind.setar2:
            if len(self.low_coefficients) != len(self.high_coefficients):
                raise setartree.shared.UsageError('Regime coefficient vectors differ in length')
            if not 1 <= self.threshold_lag <= self.ar_order:
                raise setartree.shared.UsageError(
                    f'Threshold lag {self.threshold_lag} outside 1..{self.ar_order}')

    @property
    def ar_order(self):
        return max(1, len(self.low_coefficients) - 1)


def _rng(config, index):
    return np.random.Generator(np.random.Philox(setartree.shared.derive_seed(config.seed, index)))


def _check_finite(values, series_id):
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > DIVERGENCE_LIMIT:
        raise DivergedSeries(f'Simulated series diverged: {series_id}')


def _series_id(index):
    return f'T{index + 1}'


def _collection(config, generate):
    series = []
    for idx in range(config.n_series):
        values = generate(_rng(config, idx), idx)
        _check_finite(values, _series_id(idx))
        series.append(setartree.data_model.TimeSeries(series_id=_series_id(idx), values=values))
    _LOGGER.debug('Simulated %d %s series', len(series), config.kind.value)
    return setartree.data_model.SeriesCollection(series=series)


def _initial(config, rng, index, low, high):
    if config.initial_values is not None:
        return config.initial_values[index % len(config.initial_values)]
    value = rng.uniform(low, high)
    # 0.5 maps onto the 1 -> 0 fixed point of the r=4 logistic map
    while value == 0.5:
        value = rng.uniform(low, high)
    return value


def gen_chaotic_logistic(config):
    """x[t+1] = r x[t] (1 - x[t]), with optional additive noise clipped into (0, 1)."""
    if not 0.0 < config.r <= 4.0:
        raise setartree.shared.UsageError(f'Logistic r must be in (0, 4]: {config.r}')
    clip_low = np.finfo(float).eps
    clip_high = 1.0 - clip_low

    def generate(rng, idx):
        values = np.empty(config.length)
        values[0] = _initial(config, rng, idx, 0.0, 1.0)
        for t in range(1, config.length):
            prev = values[t - 1]
            nxt = config.r * prev * (1.0 - prev)
            if config.noise_sd > 0.0:
                nxt = min(max(nxt + rng.normal(0.0, config.noise_sd), clip_low), clip_high)
            values[t] = nxt
        return values

    return _collection(config, generate)


def _mackey_glass_rate(config, current, delayed):
    return config.beta * delayed / (1.0 + delayed ** config.n_exp) - config.gamma * current


def _steps_per(value, dt, name):
    steps = value / dt
    if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
        raise setartree.shared.UsageError(f'{name}={value} is not a whole multiple of dt={dt}')
    return int(round(steps))


def gen_mackey_glass(config):
    """
    Fixed-step RK4 on dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t),
    with a constant history, sampled once per time unit after `warmup` units.

    The delayed value at half steps is the mean of its two grid neighbours.
    """
    if config.tau < 1 or config.dt <= 0.0:
        raise setartree.shared.UsageError(f'Need tau >= 1 and dt > 0: {config.tau}, {config.dt}')
    delay_steps = _steps_per(config.tau, config.dt, 'tau')
    sample_every = _steps_per(1.0, config.dt, '1')
    total_units = config.warmup + config.length
    n_steps = total_units * sample_every
    dt = config.dt

    def generate(rng, idx):
        history = _initial(config, rng, idx, 0.5, 1.5)
        x = np.empty(delay_steps + n_steps)
        x[:delay_steps + 1] = history
        for step in range(delay_steps, delay_steps + n_steps - 1):
            current = x[step]
            lag_now = x[step - delay_steps]
            lag_next = x[step - delay_steps + 1]
            lag_half = 0.5 * (lag_now + lag_next)
            k1 = _mackey_glass_rate(config, current, lag_now)
            k2 = _mackey_glass_rate(config, current + 0.5 * dt * k1, lag_half)
            k3 = _mackey_glass_rate(config, current + 0.5 * dt * k2, lag_half)
            k4 = _mackey_glass_rate(config, current + dt * k3, lag_next)
            x[step + 1] = current + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if abs(x[step + 1]) > DIVERGENCE_LIMIT:
                raise DivergedSeries(f'Mackey-Glass series diverged: {_series_id(idx)}')
        sampled = x[delay_steps::sample_every]
        return sampled[config.warmup:config.warmup + config.length]

    return _collection(config, generate)


def gen_setar2(config):
    """
    Two-regime SETAR: the low regime applies when y[t - threshold_lag] < threshold.

    Stationarity of the regime coefficients is the caller's responsibility;
    explosive settings end in DivergedSeries.
    """
    low = np.asarray(config.low_coefficients, dtype=float)
    high = np.asarray(config.high_coefficients, dtype=float)
    order = config.ar_order

    def generate(rng, idx):
        total = config.burn_in + config.length
        values = np.empty(total)
        if config.initial_values is not None:
            start = np.asarray(config.initial_values, dtype=float)[:order]
        else:
            start = rng.uniform(0.0, 1.0, size=order)
        n_start = min(order, total)
        values[:n_start] = start[:n_start]
        for t in range(n_start, total):
            lags = values[t - order:t][::-1]
            coefficients = low if lags[config.threshold_lag - 1] < config.threshold else high
            nxt = coefficients[0] + float(coefficients[1:] @ lags[:len(coefficients) - 1])
            if config.noise_sd > 0.0:
                nxt += rng.normal(0.0, config.noise_sd)
            if not abs(nxt) <= DIVERGENCE_LIMIT:
                raise DivergedSeries(f'SETAR series diverged: {_series_id(idx)}')
            values[t] = nxt
        return values[config.burn_in:]

    return _collection(config, generate)


GENERATORS = {
    DgpKind.chaotic_logistic: gen_chaotic_logistic,
    DgpKind.mackey_glass: gen_mackey_glass,
    DgpKind.setar2: gen_setar2,
}


def simulate(config):
    return GENERATORS[config.kind](config)


if __name__ == '__main__':
    pass
