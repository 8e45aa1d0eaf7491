"""
SETAR-Tree: leaf-wise growth of a binary threshold tree with pooled linear AR
models in the leaves, and recursive multi-step forecasting.
"""
import dataclasses
import typing

import joblib
import numpy as np

import setartree.data_model
import setartree.linalg_core
import setartree.shared
import setartree.split_search
import setartree.stopping

FORMAT_VERSION = 1


@dataclasses.dataclass(frozen=True)
class LeafModel:
    fit: setartree.linalg_core.LinearFit
    n_train_rows: int

    def to_record(self):
        return {
            'beta': [float(cur) for cur in self.fit.beta],
            'sse': float(self.fit.sse),
            'n_obs': int(self.fit.n_obs),
            'n_params': int(self.fit.n_params),
            'aliased': [int(cur) for cur in self.fit.aliased],
            'n_train_rows': int(self.n_train_rows),
        }

    @classmethod
    def from_record(cls, record):
        fit = setartree.linalg_core.LinearFit(
            beta=record['beta'],
            sse=float(record['sse']),
            n_obs=int(record['n_obs']),
            n_params=int(record['n_params']),
            aliased=tuple(record.get('aliased', ())),
        )
        return cls(fit=fit, n_train_rows=int(record['n_train_rows']))


@dataclasses.dataclass(frozen=True)
class LeafNode:
    model: LeafModel
    # Indexes into the training matrix; only set on freshly trained trees.
    training_rows: typing.Optional[np.ndarray] = dataclasses.field(
        default=None, compare=False, repr=False)


@dataclasses.dataclass(frozen=True)
class InternalNode:
    decision: setartree.split_search.SplitDecision
    left: 'TreeNode'
    right: 'TreeNode'


TreeNode = typing.Union[InternalNode, LeafNode]


@dataclasses.dataclass(frozen=True)
class TrainingSummary:
    depth: int
    leaf_count: int
    rows_per_leaf: tuple


@dataclasses.dataclass(frozen=True)
class SetarTree:
    root: TreeNode
    config: setartree.stopping.StoppingConfig
    n_lags: int
    column_names: tuple
    training_summary: TrainingSummary
    covariate_specs: tuple = ()

    @property
    def n_columns(self):
        return len(self.column_names)

    def leaves(self):
        """Leaves in left-to-right order."""
        stack = [self.root]
        found = []
        while stack:
            node = stack.pop()
            if isinstance(node, LeafNode):
                found.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return found

    def splits(self):
        """(depth, column name, threshold) of every internal node, breadth first."""
        found = []
        level = [self.root]
        depth = 0
        while level:
            next_level = []
            for node in level:
                if isinstance(node, InternalNode):
                    found.append((
                        depth,
                        self.column_names[node.decision.column_index],
                        float(node.decision.threshold),
                    ))
                    next_level.extend([node.left, node.right])
            level = next_level
            depth += 1
        return found

    def to_record(self):
        return {
            'format_version': FORMAT_VERSION,
            'n_lags': self.n_lags,
            'column_names': list(self.column_names),
            'covariates': [cur.to_record() for cur in self.covariate_specs],
            'stopping': self.config.to_record(),
            'summary': {
                'depth': self.training_summary.depth,
                'leaf_count': self.training_summary.leaf_count,
                'rows_per_leaf': list(self.training_summary.rows_per_leaf),
            },
            'root': _node_to_record(self.root),
        }

    @classmethod
    def from_record(cls, record):
        version = record.get('format_version')
        if version != FORMAT_VERSION:
            raise setartree.shared.DataError(f'Unsupported tree format version: {version}')
        summary = record['summary']
        return cls(
            root=_node_from_record(record['root']),
            config=setartree.stopping.StoppingConfig.from_record(record['stopping']),
            n_lags=int(record['n_lags']),
            column_names=tuple(record['column_names']),
            training_summary=TrainingSummary(
                depth=int(summary['depth']),
                leaf_count=int(summary['leaf_count']),
                rows_per_leaf=tuple(summary['rows_per_leaf']),
            ),
            covariate_specs=tuple(
                setartree.data_model.CovariateSpec.from_record(cur)
                for cur in record.get('covariates', [])),
        )


def _node_to_record(node):
    if isinstance(node, LeafNode):
        return {'leaf': node.model.to_record()}
    return {
        'split': node.decision.to_record(),
        'left': _node_to_record(node.left),
        'right': _node_to_record(node.right),
    }


def _node_from_record(record):
    if 'leaf' in record:
        return LeafNode(model=LeafModel.from_record(record['leaf']))
    return InternalNode(
        decision=setartree.split_search.SplitDecision.from_record(record['split']),
        left=_node_from_record(record['left']),
        right=_node_from_record(record['right']),
    )


def train_pr_baseline(matrix):
    """One pooled linear AR fitted over every row; also the leaf fitting primitive."""
    if len(matrix) == 0:
        raise setartree.shared.EmptyTrainingSet('Cannot train a PR model on an empty matrix')
    fit = setartree.linalg_core.fit_least_squares(
        matrix.predictors, matrix.targets, allow_aliased=True)
    return LeafModel(fit=fit, n_train_rows=len(matrix))


@dataclasses.dataclass
class _GrowingNode:
    rows: np.ndarray
    decision: typing.Optional[setartree.split_search.SplitDecision] = None
    left: typing.Optional['_GrowingNode'] = None
    right: typing.Optional['_GrowingNode'] = None


class TreeTrainer(object):
    """Level-by-level growth of one tree over an embedded matrix."""

    def __init__(self, config=None, grid_size=setartree.split_search.DEFAULT_GRID_SIZE,
                 candidate_columns=None, threads=1):
        self.global_config = setartree.shared.GlobalConfig()
        self.logger = self.global_config.build_logger(self)
        self.config = config or setartree.stopping.StoppingConfig()
        self.grid_size = grid_size
        self.candidate_columns = candidate_columns
        self.threads = threads

    def _try_split(self, matrix, node, depth):
        """The accepted decision for a frontier node, or None to freeze it."""
        n_predictors = matrix.n_columns
        min_child = setartree.split_search.min_child_size(n_predictors)
        if len(node.rows) < 2 * min_child:
            return None
        predictors = matrix.predictors[node.rows]
        targets = matrix.targets[node.rows]
        try:
            decision = setartree.split_search.get_opt_params(
                predictors, targets,
                candidate_columns=self.candidate_columns,
                grid_size=self.grid_size,
                min_child=min_child,
            )
        except setartree.split_search.NoValidSplit:
            return None
        good = setartree.stopping.is_good_split(
            decision.parent_fit, (decision.left_fit, decision.right_fit), self.config, depth)
        if not good:
            return None
        return decision

    def _grow(self, matrix):
        root = _GrowingNode(rows=np.arange(len(matrix)))
        frontier = [root]
        depth = 0
        while frontier and depth < self.config.max_depth:
            decisions = joblib.Parallel(n_jobs=self.threads, prefer='threads')(
                joblib.delayed(self._try_split)(matrix, node, depth) for node in frontier)
            next_frontier = []
            for node, decision in zip(frontier, decisions):
                if decision is None:
                    continue
                left_idx, right_idx = setartree.split_search.split_node(
                    matrix.predictors[node.rows], decision)
                node.decision = decision
                node.left = _GrowingNode(rows=node.rows[left_idx])
                node.right = _GrowingNode(rows=node.rows[right_idx])
                next_frontier.extend([node.left, node.right])
            self.logger.debug(
                'Level %d: %d nodes, %d splits, alpha=%g', depth, len(frontier),
                len(next_frontier) // 2,
                setartree.stopping.alpha_at_depth(
                    self.config.alpha0, self.config.significance_divider, depth))
            if not next_frontier:
                break
            frontier = next_frontier
            depth += 1
        return root

    def _freeze(self, matrix, node):
        if node.decision is None:
            model = train_pr_baseline(matrix.subset(node.rows))
            return LeafNode(model=model, training_rows=node.rows)
        return InternalNode(
            decision=node.decision,
            left=self._freeze(matrix, node.left),
            right=self._freeze(matrix, node.right),
        )

    def __call__(self, matrix):
        min_rows = matrix.n_columns + 3
        if len(matrix) == 0:
            raise setartree.shared.EmptyTrainingSet('Training matrix has no rows')
        if len(matrix) < min_rows:
            raise setartree.shared.EmptyTrainingSet(
                f'Training matrix has {len(matrix)} rows, needs at least {min_rows}')
        grown = self._grow(matrix)
        root = self._freeze(matrix, grown)
        tree = SetarTree(
            root=root,
            config=self.config,
            n_lags=matrix.n_lags,
            column_names=matrix.column_names,
            training_summary=_summarize(root),
            covariate_specs=matrix.covariate_specs,
        )
        self.logger.info(
            'Trained tree: depth %d, %d leaves',
            tree.training_summary.depth, tree.training_summary.leaf_count)
        return tree


def _summarize(root):
    depth = 0
    rows = []
    stack = [(root, 0)]
    while stack:
        node, level = stack.pop()
        if isinstance(node, LeafNode):
            depth = max(depth, level)
            rows.append(node.model.n_train_rows)
        else:
            stack.append((node.right, level + 1))
            stack.append((node.left, level + 1))
    return TrainingSummary(depth=depth, leaf_count=len(rows), rows_per_leaf=tuple(rows))


def train_tree(matrix, config=None, grid_size=setartree.split_search.DEFAULT_GRID_SIZE,
               candidate_columns=None, threads=1):
    trainer = TreeTrainer(
        config=config,
        grid_size=grid_size,
        candidate_columns=candidate_columns,
        threads=threads,
    )
    return trainer(matrix)


def single_leaf_tree(model, matrix, config=None):
    """Wrap a PR model as a one-node tree so it can be saved and forecast like a tree."""
    config = config or setartree.stopping.StoppingConfig(max_depth=0)
    root = LeafNode(model=model)
    return SetarTree(
        root=root,
        config=config,
        n_lags=matrix.n_lags,
        column_names=matrix.column_names,
        training_summary=_summarize(root),
        covariate_specs=matrix.covariate_specs,
    )


def find_leaf(tree, instance):
    instance = np.asarray(instance, dtype=float)
    if instance.shape != (tree.n_columns,):
        raise setartree.shared.DimensionMismatch(
            f'Instance has shape {instance.shape}, tree expects {tree.n_columns} columns')
    node = tree.root
    while isinstance(node, InternalNode):
        if instance[node.decision.column_index] < node.decision.threshold:
            node = node.left
        else:
            node = node.right
    return node.model


def predict_leaf(model, instance):
    return float(model.fit.predict(instance))


def predict_rows(tree, test):
    """One-step predictions for every row of a test matrix."""
    return np.array([
        predict_leaf(find_leaf(tree, row), row) for row in test.predictors
    ])


def forecast(tree, collection, horizon):
    """Recursive multi-step forecasts: each step's output becomes the next L1."""
    if horizon < 1:
        raise setartree.shared.UsageError(f'Horizon must be >= 1: {horizon}')
    test = setartree.data_model.create_test_set(
        collection, tree.n_lags, tree.covariate_specs)
    columns = []
    for step in range(horizon):
        step_forecasts = predict_rows(tree, test)
        columns.append(step_forecasts)
        if step + 1 < horizon:
            test = setartree.data_model.update_test_set(
                test, step_forecasts, collection, step + 1)
    return setartree.data_model.ForecastMatrix(
        series_ids=test.series_ids,
        values=np.column_stack(columns),
    )


if __name__ == '__main__':
    pass
