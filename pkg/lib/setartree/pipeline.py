"""
Runs the subcommands: flag validation, phase timing and the run report.
"""
import contextlib
import dataclasses
import json
import pathlib
import sys
import time
import typing

import setartree.data_model
import setartree.dgp_sim
import setartree.metrics_eval
import setartree.model_store
import setartree.series_io
import setartree.setar_forest
import setartree.setar_tree
import setartree.shared
import setartree.stopping


class UndefinedCommandException(setartree.shared.UsageError):
    pass


_FLAGS = {
    'input': '--input',
    'output': '--out',
    'model': '--model',
    'model_out': '--model-out',
    'forecasts': '--forecasts',
    'actuals': '--actuals',
    'training': '--training',
    'train_out': '--train-out',
    'actuals_out': '--actuals-out',
    'covariate_config': '--covariates',
    'report': '--report',
    'frequency': '--frequency',
    'no_covariates': '--no-covariates',
    'lag': '--lag',
    'horizon': '--horizon',
    'seasonality': '--seasonality',
    'epsilon': '--epsilon',
    'stopping': '--stopping',
    'alpha0': '--alpha0',
    'sig_divider': '--sig-divider',
    'error_threshold': '--error-threshold',
    'max_depth': '--max-depth',
    'grid_size': '--grid-size',
    'seed': '--seed',
    'trees': '--trees',
    'bagging_fraction': '--bagging-fraction',
    'feature_fraction': '--feature-fraction',
    'randomize': '--randomize',
    'combine': '--combine',
    'baseline': '--baseline',
    'forest': '--forest',
    'kind': '--kind',
    'n_series': '--n',
    'length': '--length',
    'noise_sd': '--noise-sd',
}

_DATA = {'frequency', 'covariate_config', 'no_covariates'}
_TREE = {'lag', 'horizon', 'seasonality', 'stopping', 'alpha0', 'sig_divider',
         'error_threshold', 'max_depth', 'grid_size'}
_FOREST = {'seed', 'trees', 'bagging_fraction', 'feature_fraction', 'randomize'}

# routine -> (required options, accepted options)
_OPTIONS = {
    'simulate': (
        {'output'},
        {'output', 'report', 'kind', 'n_series', 'length', 'noise_sd', 'seed'},
    ),
    'split': (
        {'input', 'train_out', 'actuals_out', 'horizon'},
        {'input', 'train_out', 'actuals_out', 'horizon', 'report'} | _DATA,
    ),
    'train': (
        {'input', 'model_out'},
        {'input', 'model_out', 'report', 'baseline'} | _DATA | _TREE,
    ),
    'train_forest': (
        {'input', 'model_out'},
        {'input', 'model_out', 'report'} | _DATA | _TREE | _FOREST,
    ),
    'forecast': (
        {'model', 'input', 'output'},
        {'model', 'input', 'output', 'report', 'horizon', 'combine'} | _DATA,
    ),
    'evaluate': (
        {'forecasts', 'actuals', 'training', 'output'},
        {'forecasts', 'actuals', 'training', 'output', 'report', 'seasonality', 'epsilon',
         'frequency'},
    ),
    'run': (
        {'input', 'horizon'},
        {'input', 'output', 'model_out', 'report', 'baseline', 'forest', 'combine',
         'epsilon'} | _DATA | _TREE | _FOREST,
    ),
    'show_model': (
        {'model'},
        {'model', 'output'},
    ),
}

_ALWAYS = {'command', 'threads', 'log_level'}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Every flag of one invocation; None means not given."""
    command: str = 'run'
    threads: typing.Optional[int] = None
    log_level: typing.Optional[str] = None
    # paths
    input: typing.Optional[str] = None
    output: typing.Optional[str] = None
    model: typing.Optional[str] = None
    model_out: typing.Optional[str] = None
    forecasts: typing.Optional[str] = None
    actuals: typing.Optional[str] = None
    training: typing.Optional[str] = None
    train_out: typing.Optional[str] = None
    actuals_out: typing.Optional[str] = None
    covariate_config: typing.Optional[str] = None
    report: typing.Optional[str] = None
    # data
    frequency: typing.Optional[str] = None
    no_covariates: bool = False
    lag: typing.Optional[int] = None
    horizon: typing.Optional[int] = None
    seasonality: typing.Optional[int] = None
    epsilon: typing.Optional[float] = None
    # tree
    stopping: typing.Optional[str] = None
    alpha0: typing.Optional[float] = None
    sig_divider: typing.Optional[float] = None
    error_threshold: typing.Optional[float] = None
    max_depth: typing.Optional[int] = None
    grid_size: typing.Optional[int] = None
    baseline: typing.Optional[str] = None
    # forest
    forest: bool = False
    seed: typing.Optional[int] = None
    trees: typing.Optional[int] = None
    bagging_fraction: typing.Optional[float] = None
    feature_fraction: typing.Optional[float] = None
    randomize: typing.Optional[str] = None
    combine: typing.Optional[str] = None
    # simulation
    kind: typing.Optional[str] = None
    n_series: typing.Optional[int] = None
    length: typing.Optional[int] = None
    noise_sd: typing.Optional[float] = None

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_namespace(cls, namespace):
        names = {cur.name for cur in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in vars(namespace).items() if k in names})

    @property
    def routine(self):
        return _routine_name(self.command)

    def given(self):
        """Names of the options set on this invocation."""
        found = []
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if value is None or value is False or field.name in _ALWAYS:
                continue
            found.append(field.name)
        return found

    def validate(self):
        required, accepted = _OPTIONS[self.routine]
        for name in self.given():
            if name not in accepted:
                raise setartree.shared.UsageError(
                    f'{_FLAGS[name]} cannot be used with {self.command}')
        for name in sorted(required):
            if getattr(self, name) is None:
                raise setartree.shared.UsageError(f'{self.command} needs {_FLAGS[name]}')
        if self.baseline is not None and self.baseline != 'pr':
            raise setartree.shared.UsageError(f'Unknown baseline: {self.baseline}')
        if self.baseline and self.forest:
            raise setartree.shared.UsageError('--baseline pr cannot be combined with --forest')
        forest_flags = [cur for cur in self.given() if cur in _FOREST - {'seed'}]
        if self.routine == 'run' and forest_flags and not self.forest:
            raise setartree.shared.UsageError(
                f'{_FLAGS[forest_flags[0]]} needs --forest')
        if self.combine is not None and self.routine == 'run' and not self.forest:
            raise setartree.shared.UsageError('--combine needs --forest')
        for name in ('lag', 'horizon', 'seasonality', 'trees', 'n_series', 'length'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise setartree.shared.UsageError(f'{_FLAGS[name]} must be >= 1: {value}')
        if self.grid_size is not None and self.grid_size < 1:
            raise setartree.shared.UsageError(f'--grid-size must be >= 1: {self.grid_size}')
        if self.epsilon is not None and self.epsilon < 0.0:
            raise setartree.shared.UsageError(f'--epsilon must be >= 0: {self.epsilon}')
        if self.threads is not None and self.threads < 1:
            raise setartree.shared.UsageError(f'--threads must be >= 1: {self.threads}')
        # Building these validates the remaining choices and numeric ranges.
        checks = [lambda: self.frequency_hint, lambda: self.combine_mode]
        if self.routine in ('train', 'train_forest', 'run'):
            checks.append(self.stopping_config)
        if self.routine == 'train_forest' or self.forest:
            checks.append(self.forest_config)
        if self.routine == 'simulate':
            checks.append(self.dgp_config)
        for check in checks:
            check()

    @property
    def frequency_hint(self):
        if self.frequency is None:
            return setartree.data_model.FrequencyHint.none
        try:
            return setartree.data_model.FrequencyHint(self.frequency)
        except ValueError:
            raise setartree.shared.UsageError(f'Unknown frequency: {self.frequency}')

    @property
    def combine_mode(self):
        if self.combine is None:
            return setartree.setar_forest.Combine.per_tree
        try:
            return setartree.setar_forest.Combine.from_option(self.combine)
        except ValueError:
            raise setartree.shared.UsageError(f'Unknown combine mode: {self.combine}')

    def stopping_config(self):
        values = {}
        if self.stopping is not None:
            try:
                values['criterion'] = setartree.stopping.StoppingCriterion.from_option(
                    self.stopping)
            except ValueError:
                raise setartree.shared.UsageError(f'Unknown stopping criterion: {self.stopping}')
        if self.alpha0 is not None:
            values['alpha0'] = self.alpha0
        if self.sig_divider is not None:
            values['significance_divider'] = self.sig_divider
        if self.error_threshold is not None:
            values['error_threshold'] = self.error_threshold
        if self.max_depth is not None:
            values['max_depth'] = self.max_depth
        return setartree.stopping.StoppingConfig(**values)

    def forest_config(self):
        values = {'base_stopping': self.stopping_config()}
        if self.seed is not None:
            values['seed'] = self.seed
        if self.trees is not None:
            values['n_trees'] = self.trees
        if self.bagging_fraction is not None:
            values['bagging_fraction'] = self.bagging_fraction
        if self.feature_fraction is not None:
            values['feature_fraction'] = self.feature_fraction
        if self.randomize is not None:
            try:
                values['randomization'] = setartree.setar_forest.Randomization.from_option(
                    self.randomize)
            except ValueError:
                raise setartree.shared.UsageError(f'Unknown randomization: {self.randomize}')
        return setartree.setar_forest.ForestConfig(**values)

    def dgp_config(self):
        values = {}
        if self.kind is not None:
            try:
                values['kind'] = setartree.dgp_sim.DgpKind.from_option(self.kind)
            except ValueError:
                raise setartree.shared.UsageError(f'Unknown simulation kind: {self.kind}')
        for name, target in (('n_series', 'n_series'), ('length', 'length'),
                             ('seed', 'seed'), ('noise_sd', 'noise_sd')):
            value = getattr(self, name)
            if value is not None:
                values[target] = value
        return setartree.dgp_sim.DgpConfig(**values)

    def to_record(self):
        record = {'command': self.command}
        for name in self.given():
            record[name] = getattr(self, name)
        return record


@dataclasses.dataclass
class RunReport:
    command: str
    config: dict
    version: str
    resolved: dict = dataclasses.field(default_factory=dict)
    timings_ms: dict = dataclasses.field(default_factory=dict)
    model: typing.Optional[dict] = None
    aggregates: typing.Optional[dict] = None
    outputs: dict = dataclasses.field(default_factory=dict)

    def to_record(self):
        return dataclasses.asdict(self)


def _routine_name(command):
    for cur in setartree.shared.GlobalConfig.commands:
        if cur['option'] == command:
            return cur['routine']
    raise UndefinedCommandException(f'Bad command: {command}')


def write_record(record, path):
    """JSON for a ``.json`` path, YAML otherwise."""
    path = pathlib.Path(path)
    if path.suffix.lower() == '.json':
        text = json.dumps(record, indent=2) + '\n'
    else:
        text = setartree.model_store.dump_yaml(record)
    setartree.shared.atomic_write(path, text)


class Pipeline(object):

    def __init__(self, config, global_config=None):
        self.global_config = global_config or setartree.shared.GlobalConfig()
        self.logger = self.global_config.build_logger(self)
        self.config = config
        self.threads = self.global_config.resolve_threads(config.threads)
        self.grid_size = (
            config.grid_size if config.grid_size is not None else self.global_config.grid_size)
        self.report = RunReport(
            command=config.command,
            config=config.to_record(),
            version=self.global_config.version,
        )

    @contextlib.contextmanager
    def _phase(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000.0
            self.report.timings_ms[name] = self.report.timings_ms.get(name, 0.0) + elapsed
            self.logger.debug('Phase %s: %.1f ms', name, elapsed)

    def _get_command_routine(self, command):
        routine_name = _routine_name(command)
        self.logger.debug('Routine name: {}'.format(routine_name))
        return getattr(self, routine_name)

    def _read_input(self):
        with self._phase('load'):
            return setartree.series_io.read_series(
                self.config.input,
                covariate_config=self.config.covariate_config,
                frequency_hint=self.config.frequency_hint,
            )

    def _seasonality(self, collection=None):
        if self.config.seasonality is not None:
            return self.config.seasonality
        hint = self.config.frequency_hint
        if collection is not None:
            hint = collection.frequency_hint
        return hint.seasonality

    def _resolve_lag(self, collection, horizon):
        if self.config.lag is not None:
            return self.config.lag
        if horizon is None:
            raise setartree.shared.UsageError('--lag or --horizon is needed to pick the lag count')
        lag = setartree.metrics_eval.heuristic_lags(self._seasonality(collection), horizon)
        self.logger.info('Lag count from the heuristic: %d', lag)
        return lag

    def _model_kind(self):
        if self.config.baseline == 'pr':
            return setartree.model_store.ModelKind.pr
        if self.config.routine == 'train_forest' or self.config.forest:
            return setartree.model_store.ModelKind.forest
        return setartree.model_store.ModelKind.tree

    def _train(self, collection, horizon):
        lag = self._resolve_lag(collection, horizon)
        self.report.resolved['lag'] = lag
        self.report.resolved['grid_size'] = self.grid_size
        specs = ()
        if not self.config.no_covariates:
            specs = setartree.data_model.build_covariate_specs(collection)
        kind = self._model_kind()
        with self._phase('train'):
            matrix = setartree.data_model.create_input_matrix(collection, lag, specs)
            if kind is setartree.model_store.ModelKind.pr:
                leaf = setartree.setar_tree.train_pr_baseline(matrix)
                model = setartree.setar_tree.single_leaf_tree(leaf, matrix)
            elif kind is setartree.model_store.ModelKind.forest:
                forest_config = self.config.forest_config()
                self.report.resolved['seed'] = forest_config.seed
                model = setartree.setar_forest.train_forest(
                    matrix, forest_config, grid_size=self.grid_size, threads=self.threads)
            else:
                model = setartree.setar_tree.train_tree(
                    matrix, self.config.stopping_config(), grid_size=self.grid_size,
                    threads=self.threads)
        stored = setartree.model_store.StoredModel(kind=kind, model=model, horizon=horizon)
        self.report.model = setartree.model_store.summarize(stored)
        return stored

    def _forecast(self, stored, collection, horizon):
        with self._phase('forecast'):
            if stored.kind is setartree.model_store.ModelKind.forest:
                return setartree.setar_forest.forecast_forest(
                    stored.model, collection, horizon,
                    combine=self.config.combine_mode, threads=self.threads)
            return setartree.setar_tree.forecast(stored.model, collection, horizon)

    def _evaluate(self, forecasts, actuals, training, seasonality):
        epsilon = self.config.epsilon
        if epsilon is None:
            epsilon = setartree.metrics_eval.DEFAULT_EPSILON
        with self._phase('evaluate'):
            evaluation = setartree.metrics_eval.evaluate(
                forecasts, actuals, training, seasonality, epsilon)
        self.report.aggregates = evaluation.aggregates
        return evaluation

    def _wrote(self, name, path):
        self.report.outputs[name] = str(path)

    def simulate(self):
        dgp = self.config.dgp_config()
        self.report.resolved['seed'] = dgp.seed
        with self._phase('simulate'):
            collection = setartree.dgp_sim.simulate(dgp)
        setartree.series_io.write_series(collection, self.config.output)
        self._wrote('series', self.config.output)

    def split(self):
        collection = self._read_input()
        train, test = collection.split_holdout(self.config.horizon)
        setartree.series_io.write_series(train, self.config.train_out)
        setartree.series_io.write_series(test, self.config.actuals_out)
        self._wrote('training', self.config.train_out)
        self._wrote('actuals', self.config.actuals_out)

    def train(self):
        collection = self._read_input()
        stored = self._train(collection, self.config.horizon)
        setartree.model_store.save_model(stored, self.config.model_out)
        self._wrote('model', self.config.model_out)

    def train_forest(self):
        self.train()

    def forecast(self):
        stored = setartree.model_store.load_model(self.config.model)
        horizon = self.config.horizon or stored.horizon
        if horizon is None:
            raise setartree.shared.UsageError('forecast needs --horizon (the model has none)')
        self.report.resolved['horizon'] = horizon
        collection = self._read_input()
        forecasts = self._forecast(stored, collection, horizon)
        setartree.series_io.write_forecasts(forecasts, self.config.output)
        self._wrote('forecasts', self.config.output)

    def evaluate(self):
        with self._phase('load'):
            forecasts = setartree.series_io.read_forecasts(self.config.forecasts)
            actuals = setartree.series_io.read_series(self.config.actuals)
            training = setartree.series_io.read_series(
                self.config.training, frequency_hint=self.config.frequency_hint)
        seasonality = self._seasonality(training) or 1
        self.report.resolved['seasonality'] = seasonality
        evaluation = self._evaluate(forecasts, actuals, training, seasonality)
        write_record(evaluation.to_record(), self.config.output)
        self._wrote('evaluation', self.config.output)

    def run(self):
        """Hold out the last `horizon` points, train, forecast them and score."""
        collection = self._read_input()
        horizon = self.config.horizon
        train, test = collection.split_holdout(horizon)
        stored = self._train(train, horizon)
        forecasts = self._forecast(stored, train, horizon)
        seasonality = self._seasonality(collection) or 1
        self.report.resolved['seasonality'] = seasonality
        self._evaluate(forecasts, test, train, seasonality)
        if self.config.output:
            setartree.series_io.write_forecasts(forecasts, self.config.output)
            self._wrote('forecasts', self.config.output)
        if self.config.model_out:
            setartree.model_store.save_model(stored, self.config.model_out)
            self._wrote('model', self.config.model_out)
        return forecasts

    def show_model(self):
        stored = setartree.model_store.load_model(self.config.model)
        summary = setartree.model_store.summarize(stored)
        self.report.model = summary
        if self.config.output:
            write_record(summary, self.config.output)
            self._wrote('summary', self.config.output)
        else:
            sys.stdout.write(setartree.model_store.dump_yaml(summary))

    def __call__(self):
        command = self.config.command
        self.logger.debug('Pipeline running command: {}'.format(command))
        (self._get_command_routine(command))()
        if self.config.report:
            write_record(self.report.to_record(), self.config.report)
        return self.report


def run_pipeline(config, global_config=None):
    pipeline = Pipeline(config, global_config=global_config)
    return pipeline()


if __name__ == '__main__':
    pass
