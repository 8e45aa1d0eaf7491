"""
Split acceptance: the general linear F-test, the error-reduction check and
the per-level significance schedule.
"""
import dataclasses
import enum
import logging
import math

import setartree.fdist_math
import setartree.shared

_LOGGER = logging.getLogger(__name__)


class InsufficientDf(Exception):
    pass


class StoppingCriterion(enum.Enum):
    lin_test = 'lin_test'
    error_red = 'error_red'
    both = 'both'

    @classmethod
    def from_option(cls, option):
        """Accept CLI spellings like 'lin-test'."""
        return cls(str(option).replace('-', '_'))


@dataclasses.dataclass(frozen=True)
class StoppingConfig:
    criterion: StoppingCriterion = StoppingCriterion.both
    alpha0: float = 0.05
    significance_divider: float = 2.0
    error_threshold: float = 0.03
    max_depth: int = 1000

    def __post_init__(self):
        object.__setattr__(self, 'criterion', StoppingCriterion(self.criterion))
        if not 0.0 < self.alpha0 < 1.0:
            raise setartree.shared.UsageError(f'alpha0 must be in (0, 1): {self.alpha0}')
        if not self.significance_divider > 1.0:
            raise setartree.shared.UsageError(
                f'Significance divider must be > 1: {self.significance_divider}')
        if self.error_threshold < 0.0:
            raise setartree.shared.UsageError(
                f'Error threshold must be >= 0: {self.error_threshold}')
        if self.max_depth < 0:
            raise setartree.shared.UsageError(f'Max depth must be >= 0: {self.max_depth}')

    def to_record(self):
        record = dataclasses.asdict(self)
        record['criterion'] = self.criterion.value
        return record

    @classmethod
    def from_record(cls, record):
        return cls(**record)


@dataclasses.dataclass(frozen=True)
class FTestResult:
    f_stat: float
    df1: int
    df2: int
    p_value: float


def check_linearity(parent_sse, child_total_sse, n, n_predictors, alpha):
    """
    General linear F-test of the parent model against the two child models.

    F* = ((SSE(P) - SSE(C)) / (L + 1)) / (SSE(C) / (N - 2L - 2)) with L = n_predictors.
    Returns (pass, FTestResult); pass means the split is significant.
    """
    df1 = n_predictors + 1
    df2 = n - 2 * n_predictors - 2
    if df2 < 1:
        raise InsufficientDf(f'N={n}, L={n_predictors} leaves {df2} residual degrees of freedom')
    child_total_sse = min(child_total_sse, parent_sse)
    improvement = parent_sse - child_total_sse
    if child_total_sse == 0.0:
        if improvement > 0.0:
            result = FTestResult(f_stat=math.inf, df1=df1, df2=df2, p_value=0.0)
            return True, result
        result = FTestResult(f_stat=0.0, df1=df1, df2=df2, p_value=1.0)
        return False, result
    f_stat = (improvement / df1) / (child_total_sse / df2)
    p_value = setartree.fdist_math.f_upper_tail(f_stat, df1, df2)
    result = FTestResult(f_stat=f_stat, df1=df1, df2=df2, p_value=p_value)
    return p_value < alpha, result


def check_error_reduction(parent_sse, child_total_sse, error_threshold):
    if parent_sse <= 0.0:
        return False
    return (parent_sse - child_total_sse) / parent_sse >= error_threshold


def alpha_at_depth(alpha0, divider, depth):
    if depth < 0:
        raise ValueError(f'Depth must be >= 0: {depth}')
    return alpha0 / divider ** depth


def is_good_split(parent_fit, child_fits, config, depth):
    """Accept or reject a split per the configured criterion."""
    child_sse = sum(cur.sse for cur in child_fits)
    criterion = config.criterion
    linear_ok = True
    if criterion in (StoppingCriterion.lin_test, StoppingCriterion.both):
        alpha = alpha_at_depth(config.alpha0, config.significance_divider, depth)
        try:
            linear_ok, result = check_linearity(
                parent_fit.sse, child_sse, parent_fit.n_obs, parent_fit.n_params - 1, alpha)
            _LOGGER.debug('F-test at depth %d: %s (alpha=%g)', depth, result, alpha)
        except InsufficientDf as exc:
            _LOGGER.debug('Split rejected: %s', exc)
            return False
    if criterion is StoppingCriterion.lin_test:
        return linear_ok
    reduction_ok = check_error_reduction(parent_fit.sse, child_sse, config.error_threshold)
    if criterion is StoppingCriterion.error_red:
        return reduction_ok
    return linear_ok and reduction_ok


if __name__ == '__main__':
    pass
