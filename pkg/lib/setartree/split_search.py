"""
Grid search for the (column, threshold) split with the smallest child SSE.

Regime convention: the left child gets rows with value < threshold, the right
child gets value >= threshold.
"""
import dataclasses
import logging

import joblib
import numpy as np

import setartree.linalg_core

_LOGGER = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 15
# Relative variance below which a column counts as constant inside a node.
_CONSTANT_TOLERANCE = 1e-12


class DegenerateColumn(Exception):
    pass


class NoValidSplit(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class ThresholdGrid:
    values: tuple
    source_column: int


@dataclasses.dataclass(frozen=True)
class SplitDecision:
    column_index: int
    threshold: float
    left_sse: float
    right_sse: float
    total_sse: float
    left_count: int
    right_count: int
    left_fit: object = dataclasses.field(default=None, compare=False, repr=False)
    right_fit: object = dataclasses.field(default=None, compare=False, repr=False)
    parent_fit: object = dataclasses.field(default=None, compare=False, repr=False)

    def to_record(self):
        return {
            'column_index': int(self.column_index),
            'threshold': float(self.threshold),
            'left_sse': float(self.left_sse),
            'right_sse': float(self.right_sse),
            'total_sse': float(self.total_sse),
            'left_count': int(self.left_count),
            'right_count': int(self.right_count),
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            column_index=int(record['column_index']),
            threshold=float(record['threshold']),
            left_sse=float(record['left_sse']),
            right_sse=float(record['right_sse']),
            total_sse=float(record['total_sse']),
            left_count=int(record['left_count']),
            right_count=int(record['right_count']),
        )


@dataclasses.dataclass(frozen=True)
class ScanCandidate:
    """One evaluated threshold of a column scan."""
    column_index: int
    threshold: float
    left_count: int
    right_count: int
    left_fit: setartree.linalg_core.LinearFit
    right_fit: setartree.linalg_core.LinearFit
    valid: bool

    @property
    def total_sse(self):
        return self.left_fit.sse + self.right_fit.sse


@dataclasses.dataclass(frozen=True)
class ColumnScan:
    """Every evaluated threshold of one column, as parallel arrays."""
    column_index: int
    thresholds: np.ndarray
    left_fits: setartree.linalg_core.StackedFits
    right_fits: setartree.linalg_core.StackedFits
    valid: np.ndarray

    def __len__(self):
        return self.thresholds.shape[0]

    def __iter__(self):
        for idx in range(len(self)):
            yield self.candidate(idx)

    @property
    def total_sse(self):
        return self.left_fits.sse + self.right_fits.sse

    def candidate(self, index):
        return ScanCandidate(
            column_index=self.column_index,
            threshold=float(self.thresholds[index]),
            left_count=int(self.left_fits.count[index]),
            right_count=int(self.right_fits.count[index]),
            left_fit=self.left_fits.fit(index),
            right_fit=self.right_fits.fit(index),
            valid=bool(self.valid[index]),
        )

    def best(self):
        """Lowest total SSE among valid thresholds (first on ties), or None."""
        if not self.valid.any():
            return None
        total = np.where(self.valid, self.total_sse, np.inf)
        return self.candidate(int(np.argmin(total)))


def min_child_size(n_predictors):
    """n_params + 1 rows, the smallest child with positive residual df."""
    return n_predictors + 2


def make_threshold_grid(column_values, q=DEFAULT_GRID_SIZE, source_column=0):
    """
    The q quantiles at probabilities k/(q+1), by linear interpolation of the
    order statistics, deduplicated and kept strictly inside (min, max).
    """
    if q < 1:
        raise ValueError(f'Grid size must be >= 1: {q}')
    values = np.asarray(column_values, dtype=float)
    low, high = float(np.min(values)), float(np.max(values))
    if not low < high:
        raise DegenerateColumn(f'Column {source_column} is constant')
    probs = np.arange(1, q + 1) / (q + 1)
    quantiles = np.quantile(values, probs, method='linear')
    inside = np.unique(quantiles[(quantiles > low) & (quantiles < high)])
    if inside.size == 0:
        raise DegenerateColumn(f'Column {source_column} has no interior quantiles')
    return ThresholdGrid(values=tuple(float(cur) for cur in inside), source_column=source_column)


def _constant_columns(B, count):
    """Mask of x_bar columns (intercept excluded) with zero variance, per stacked system."""
    count = np.asarray(count, dtype=float)[..., None]
    means = B[..., 0, 1:] / count
    second = np.diagonal(B, axis1=-2, axis2=-1)[..., 1:] / count
    variance = second - means ** 2
    return variance <= _CONSTANT_TOLERANCE * np.maximum(second, 1.0)


def _children_are_valid(children, fits, parent_fit, parent_constant):
    """
    A child may lose rank only through columns that are constant inside it
    (e.g. the one-hot column the split was made on).
    """
    newly_constant = np.sum(_constant_columns(children.B, children.count) & ~parent_constant,
                            axis=-1)
    return fits.rank >= parent_fit.rank - newly_constant


def scan_column(predictors, targets, column, grid_size=DEFAULT_GRID_SIZE, min_child=None,
                parent_ip=None, parent_fit=None):
    """
    Evaluate every threshold of one column with the incremental inner products.

    Rows are sorted by the column; the left inner products of all thresholds
    are prefix sums over the sorted rows and the right ones are the parent
    minus the left. Thresholds leaving a child below `min_child` rows are
    skipped.
    """
    predictors = np.asarray(predictors, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n_rows, n_predictors = predictors.shape
    if min_child is None:
        min_child = min_child_size(n_predictors)
    if parent_ip is None:
        parent_ip = setartree.linalg_core.InnerProducts.from_rows(predictors, targets)
    if parent_fit is None:
        parent_fit = setartree.linalg_core.fit_from_inner_products(parent_ip, allow_aliased=True)
    grid = make_threshold_grid(predictors[:, column], grid_size, source_column=column)
    thresholds = np.array(grid.values)
    order = np.argsort(predictors[:, column], kind='stable')
    sorted_col = predictors[order, column]
    cuts = np.searchsorted(sorted_col, thresholds, side='left')
    prefix = setartree.linalg_core.prefix_inner_products(
        predictors[order], targets[order], cuts)
    keep = (cuts >= min_child) & (n_rows - cuts >= min_child)
    left = prefix.take(keep)
    right = left.complement(parent_ip)
    left_fits = setartree.linalg_core.fit_stacked(left)
    right_fits = setartree.linalg_core.fit_stacked(right)
    parent_constant = _constant_columns(parent_ip.B, parent_ip.count)
    left_valid = _children_are_valid(left, left_fits, parent_fit, parent_constant)
    valid = left_valid & _children_are_valid(right, right_fits, parent_fit, parent_constant)
    return ColumnScan(
        column_index=column,
        thresholds=thresholds[keep],
        left_fits=left_fits,
        right_fits=right_fits,
        valid=valid,
    )


def _best_of_column(predictors, targets, column, grid_size, min_child, parent_ip, parent_fit):
    try:
        scan = scan_column(
            predictors, targets, column, grid_size, min_child, parent_ip, parent_fit)
    except DegenerateColumn as exc:
        _LOGGER.debug('Skipping column: %s', exc)
        return None
    return scan.best()


def get_opt_params(predictors, targets, candidate_columns=None, grid_size=DEFAULT_GRID_SIZE,
                   min_child=None, threads=1):
    """
    Best split of a node over all candidate columns and grid thresholds.

    Ties go to the lower column index, then the lower threshold. Columns may
    be scanned in parallel; the reduction runs in column order.
    """
    predictors = np.asarray(predictors, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n_rows, n_predictors = predictors.shape
    if min_child is None:
        min_child = min_child_size(n_predictors)
    if candidate_columns is None:
        candidate_columns = range(n_predictors)
    columns = sorted(set(int(cur) for cur in candidate_columns))
    if n_rows < 2 * min_child:
        raise NoValidSplit(f'{n_rows} rows, need {2 * min_child} for two children')
    parent_ip = setartree.linalg_core.InnerProducts.from_rows(predictors, targets)
    parent_fit = setartree.linalg_core.fit_from_inner_products(parent_ip, allow_aliased=True)
    args = (grid_size, min_child, parent_ip, parent_fit)
    if threads == 1:
        per_column = [_best_of_column(predictors, targets, col, *args) for col in columns]
    else:
        per_column = joblib.Parallel(n_jobs=threads, prefer='threads')(
            joblib.delayed(_best_of_column)(predictors, targets, col, *args)
            for col in columns
        )
    best = None
    for cur in per_column:
        if cur is None:
            continue
        if best is None or cur.total_sse < best.total_sse:
            best = cur
    if best is None:
        raise NoValidSplit('No candidate split yields two fittable children')
    return SplitDecision(
        column_index=best.column_index,
        threshold=best.threshold,
        left_sse=best.left_fit.sse,
        right_sse=best.right_fit.sse,
        total_sse=best.total_sse,
        left_count=best.left_count,
        right_count=best.right_count,
        left_fit=best.left_fit,
        right_fit=best.right_fit,
        parent_fit=parent_fit,
    )


def split_node(predictors, decision):
    """Row indexes of the left (< threshold) and right (>= threshold) children."""
    column = np.asarray(predictors, dtype=float)[:, decision.column_index]
    goes_left = column < decision.threshold
    return np.flatnonzero(goes_left), np.flatnonzero(~goes_left)


if __name__ == '__main__':
    pass
