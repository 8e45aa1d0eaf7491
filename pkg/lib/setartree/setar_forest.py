"""
SETAR-Forest: a bag of SETAR-Trees with randomized stopping parameters whose
forecasts are averaged.
"""
import dataclasses
import enum
import math

import joblib
import numpy as np

import setartree.data_model
import setartree.setar_tree
import setartree.shared
import setartree.split_search
import setartree.stopping


class TreeTrainingError(setartree.shared.NumericalError):

    def __init__(self, message, tree_index):
        super().__init__(message)
        self.tree_index = tree_index


class Randomization(enum.Enum):
    significance = 'significance'
    error_red = 'error_red'
    both = 'both'

    @classmethod
    def from_option(cls, option):
        return cls(str(option).replace('-', '_'))


class Combine(enum.Enum):
    # each tree propagates its own forecasts, averaged at the end
    per_tree = 'per_tree'
    # the mean of each step is fed back into every tree
    per_step = 'per_step'

    @classmethod
    def from_option(cls, option):
        return cls(str(option).replace('-', '_'))


def _check_range(name, bounds):
    low, high = bounds
    if low > high:
        raise setartree.shared.UsageError(f'{name} range is empty: {bounds}')


@dataclasses.dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 10
    bagging_fraction: float = 0.8
    feature_fraction: float = 1.0
    seed: int = 0
    randomization: Randomization = Randomization.both
    alpha0_range: tuple = (0.01, 0.1)
    divider_range: tuple = (1.5, 5.0)
    error_threshold_range: tuple = (0.01, 0.05)
    # Stopping values for the parameters the randomization mode leaves fixed.
    base_stopping: setartree.stopping.StoppingConfig = setartree.stopping.StoppingConfig()

    def __post_init__(self):
        object.__setattr__(self, 'randomization', Randomization(self.randomization))
        for name in ('alpha0_range', 'divider_range', 'error_threshold_range'):
            bounds = tuple(float(cur) for cur in getattr(self, name))
            object.__setattr__(self, name, bounds)
            _check_range(name, bounds)
        if self.n_trees < 1:
            raise setartree.shared.UsageError(f'Need at least one tree: {self.n_trees}')
        if not 0.0 < self.bagging_fraction <= 1.0:
            raise setartree.shared.UsageError(
                f'Bagging fraction must be in (0, 1]: {self.bagging_fraction}')
        if not 0.0 < self.feature_fraction <= 1.0:
            raise setartree.shared.UsageError(
                f'Feature fraction must be in (0, 1]: {self.feature_fraction}')
        if not 0 <= self.seed < 2 ** 64:
            raise setartree.shared.UsageError(
                f'Seed must be an unsigned 64-bit value: {self.seed}')

    def to_record(self):
        return {
            'n_trees': self.n_trees,
            'bagging_fraction': self.bagging_fraction,
            'feature_fraction': self.feature_fraction,
            'seed': self.seed,
            'randomization': self.randomization.value,
            'alpha0_range': list(self.alpha0_range),
            'divider_range': list(self.divider_range),
            'error_threshold_range': list(self.error_threshold_range),
            'base_stopping': self.base_stopping.to_record(),
        }

    @classmethod
    def from_record(cls, record):
        record = dict(record)
        record['base_stopping'] = setartree.stopping.StoppingConfig.from_record(
            record['base_stopping'])
        return cls(**record)


@dataclasses.dataclass(frozen=True)
class TreePlan:
    """Everything tree i of a forest is trained from."""
    index: int
    seed: int
    rows: np.ndarray
    columns: tuple
    stopping: setartree.stopping.StoppingConfig


@dataclasses.dataclass(frozen=True)
class SetarForest:
    trees: tuple
    plans: tuple
    config: ForestConfig
    # Rows of the matrix the forest was trained on; the plans are drawn from it.
    n_training_rows: int = 0

    def to_record(self):
        return {
            'config': self.config.to_record(),
            'n_training_rows': int(self.n_training_rows),
            'trees': [
                {
                    'seed': int(plan.seed),
                    'columns': list(plan.columns),
                    'n_rows': int(len(plan.rows)),
                    'tree': tree.to_record(),
                }
                for plan, tree in zip(self.plans, self.trees)
            ],
        }

    @classmethod
    def from_record(cls, record):
        """Rebuild the trees; row samples are drawn again from the stored seed and size."""
        config = ForestConfig.from_record(record['config'])
        n_training_rows = int(record['n_training_rows'])
        trees = []
        plans = []
        for idx, cur in enumerate(record['trees']):
            tree = setartree.setar_tree.SetarTree.from_record(cur['tree'])
            plan = plan_tree(idx, n_training_rows, tree.n_columns, config)
            stored = (int(cur['seed']), tuple(cur['columns']), int(cur['n_rows']))
            if stored != (plan.seed, plan.columns, len(plan.rows)):
                raise setartree.shared.DataError(
                    f'Tree {idx} does not match the plan drawn from the forest seed')
            trees.append(tree)
            plans.append(plan)
        return cls(
            trees=tuple(trees),
            plans=tuple(plans),
            config=config,
            n_training_rows=n_training_rows,
        )


def _draw_stopping(rng, config):
    base = config.base_stopping
    alpha0 = base.alpha0
    divider = base.significance_divider
    error_threshold = base.error_threshold
    mode = config.randomization
    if mode in (Randomization.significance, Randomization.both):
        alpha0 = float(rng.uniform(*config.alpha0_range))
        divider = float(rng.uniform(*config.divider_range))
    if mode in (Randomization.error_red, Randomization.both):
        error_threshold = float(rng.uniform(*config.error_threshold_range))
    return setartree.stopping.StoppingConfig(
        criterion=setartree.stopping.StoppingCriterion.both,
        alpha0=alpha0,
        significance_divider=divider,
        error_threshold=error_threshold,
        max_depth=base.max_depth,
    )


def plan_tree(index, n_rows, n_columns, config):
    """Seed, row sample, column sample and stopping parameters of tree `index`."""
    seed = setartree.shared.derive_seed(config.seed, index)
    rng = np.random.Generator(np.random.Philox(seed))
    n_sample = math.ceil(config.bagging_fraction * n_rows)
    rows = np.sort(rng.choice(n_rows, size=n_sample, replace=False))
    n_cols = math.ceil(config.feature_fraction * n_columns)
    columns = tuple(int(cur) for cur in np.sort(rng.choice(n_columns, size=n_cols, replace=False)))
    stopping = _draw_stopping(rng, config)
    return TreePlan(index=index, seed=seed, rows=rows, columns=columns, stopping=stopping)


def _train_planned(matrix, plan, grid_size):
    try:
        return setartree.setar_tree.train_tree(
            matrix.subset(plan.rows),
            config=plan.stopping,
            grid_size=grid_size,
            candidate_columns=plan.columns,
        )
    except setartree.shared.SetarError as exc:
        raise TreeTrainingError(f'Tree {plan.index} failed: {exc}', plan.index) from exc


class ForestTrainer(object):

    def __init__(self, config=None, grid_size=setartree.split_search.DEFAULT_GRID_SIZE,
                 threads=1):
        self.global_config = setartree.shared.GlobalConfig()
        self.logger = self.global_config.build_logger(self)
        self.config = config or ForestConfig()
        self.grid_size = grid_size
        self.threads = threads

    def __call__(self, matrix):
        if len(matrix) == 0:
            raise setartree.shared.EmptyTrainingSet('Training matrix has no rows')
        plans = [
            plan_tree(idx, len(matrix), matrix.n_columns, self.config)
            for idx in range(self.config.n_trees)
        ]
        for plan in plans:
            self.logger.debug(
                'Tree %d: seed=%d rows=%d stopping=%s',
                plan.index, plan.seed, len(plan.rows), plan.stopping)
        trees = joblib.Parallel(n_jobs=self.threads, prefer='threads')(
            joblib.delayed(_train_planned)(matrix, plan, self.grid_size) for plan in plans)
        self.logger.info('Trained forest of %d trees', len(trees))
        return SetarForest(
            trees=tuple(trees),
            plans=tuple(plans),
            config=self.config,
            n_training_rows=len(matrix),
        )


def train_forest(matrix, config=None, grid_size=setartree.split_search.DEFAULT_GRID_SIZE,
                 threads=1):
    trainer = ForestTrainer(config=config, grid_size=grid_size, threads=threads)
    return trainer(matrix)


def forecast_trees(forest, collection, horizon, threads=1):
    """Each tree's own recursive forecast."""
    return joblib.Parallel(n_jobs=threads, prefer='threads')(
        joblib.delayed(setartree.setar_tree.forecast)(tree, collection, horizon)
        for tree in forest.trees)


def _forecast_per_step(forest, collection, horizon):
    first = forest.trees[0]
    test = setartree.data_model.create_test_set(
        collection, first.n_lags, first.covariate_specs)
    columns = []
    for step in range(horizon):
        per_tree = [setartree.setar_tree.predict_rows(tree, test) for tree in forest.trees]
        step_mean = np.mean(np.stack(per_tree), axis=0)
        columns.append(step_mean)
        if step + 1 < horizon:
            test = setartree.data_model.update_test_set(test, step_mean, collection, step + 1)
    return setartree.data_model.ForecastMatrix(
        series_ids=test.series_ids, values=np.column_stack(columns))


def forecast_forest(forest, collection, horizon, combine=Combine.per_tree, threads=1):
    if horizon < 1:
        raise setartree.shared.UsageError(f'Horizon must be >= 1: {horizon}')
    combine = Combine(combine)
    if combine is Combine.per_step:
        return _forecast_per_step(forest, collection, horizon)
    per_tree = forecast_trees(forest, collection, horizon, threads=threads)
    return setartree.data_model.ForecastMatrix.mean_of(per_tree)


if __name__ == '__main__':
    pass
