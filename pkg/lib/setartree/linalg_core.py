"""
Least-squares fits of pooled linear AR models through their inner products.

Every fit carries an intercept: the design row is x_bar = [1, x]. The fit only
needs B = sum(x_bar x_bar^T), c = sum(x_bar y), d = sum(y^2) and the row count,
so left/right child fits for a threshold scan come from running sums and one
subtraction from the parent.
"""
import dataclasses
import logging

import numpy as np
import scipy.linalg

import setartree.shared

_LOGGER = logging.getLogger(__name__)

# Relative to the largest diagonal entry of B.
RANK_TOLERANCE = 1e-10


class SingularSystem(setartree.shared.NumericalError):
    pass


@dataclasses.dataclass(frozen=True)
class LinearFit:
    beta: np.ndarray
    sse: float
    n_obs: int
    n_params: int
    rank: int = dataclasses.field(default=-1, compare=False)
    # Columns of x_bar that were linearly dependent on earlier ones (coefficient 0).
    aliased: tuple = dataclasses.field(default=(), compare=False)

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        beta.flags.writeable = False
        object.__setattr__(self, 'beta', beta)
        if self.rank < 0:
            object.__setattr__(self, 'rank', self.n_params - len(self.aliased))

    @property
    def intercept(self):
        return float(self.beta[0])

    @property
    def coefficients(self):
        return self.beta[1:]

    def predict(self, predictors):
        predictors = np.asarray(predictors, dtype=float)
        if predictors.shape[-1] != self.n_params - 1:
            raise setartree.shared.DimensionMismatch(
                f'Expected {self.n_params - 1} predictors, got {predictors.shape[-1]}')
        return self.beta[0] + predictors @ self.beta[1:]


@dataclasses.dataclass(frozen=True)
class InnerProducts:
    B: np.ndarray
    c: np.ndarray
    d: float
    count: int

    @classmethod
    def zero(cls, n_predictors):
        size = n_predictors + 1
        return cls(B=np.zeros((size, size)), c=np.zeros(size), d=0.0, count=0)

    @classmethod
    def from_rows(cls, predictors, targets):
        predictors = np.asarray(predictors, dtype=float)
        targets = np.asarray(targets, dtype=float).reshape(-1)
        if predictors.ndim != 2 or predictors.shape[0] != targets.shape[0]:
            raise setartree.shared.DimensionMismatch(
                f'Predictors {predictors.shape} do not match {targets.shape[0]} targets')
        design = _with_intercept(predictors)
        return cls(
            B=design.T @ design,
            c=design.T @ targets,
            d=float(targets @ targets),
            count=int(targets.shape[0]),
        )

    @property
    def n_params(self):
        return self.c.shape[0]

    def __add__(self, other):
        _check_same_layout(self, other)
        return InnerProducts(
            B=self.B + other.B,
            c=self.c + other.c,
            d=self.d + other.d,
            count=self.count + other.count,
        )

    def __sub__(self, other):
        _check_same_layout(self, other)
        return InnerProducts(
            B=self.B - other.B,
            c=self.c - other.c,
            d=self.d - other.d,
            count=self.count - other.count,
        )


def _check_same_layout(left, right):
    if left.n_params != right.n_params:
        raise setartree.shared.DimensionMismatch(
            f'Inner products with {left.n_params} and {right.n_params} parameters')


def _with_intercept(predictors):
    return np.hstack([np.ones((predictors.shape[0], 1)), predictors])


def accumulate(ip, predictors, targets):
    """Add the rank-one updates of the given rows to `ip`."""
    predictors = np.asarray(predictors, dtype=float)
    if predictors.shape[0] == 0:
        return ip
    if predictors.ndim != 2 or predictors.shape[1] + 1 != ip.n_params:
        raise setartree.shared.DimensionMismatch(
            f'Rows with shape {predictors.shape} do not fit {ip.n_params} parameters')
    return ip + InnerProducts.from_rows(predictors, targets)


def right_complement(parent, left):
    """Inner products of the parent rows that are not in `left`."""
    assert left.count <= parent.count, 'left child larger than parent'
    return parent - left


def _independent_columns(B, tolerance):
    """Greedy left-to-right selection of columns that are not aliased."""
    kept = []
    for col in range(B.shape[0]):
        candidate = kept + [col]
        try:
            factor = np.linalg.cholesky(B[np.ix_(candidate, candidate)])
        except np.linalg.LinAlgError:
            continue
        if factor[-1, -1] ** 2 > tolerance:
            kept.append(col)
    return kept


def _solve(ip, allow_aliased):
    size = ip.n_params
    scale = float(np.max(np.diag(ip.B))) if ip.count > 0 else 0.0
    if scale <= 0.0:
        raise SingularSystem('Normal equations have no information (no rows)')
    tolerance = RANK_TOLERANCE * scale
    try:
        factor, lower = scipy.linalg.cho_factor(ip.B, lower=True, check_finite=False)
        pivots = np.diag(factor) ** 2
        if np.all(pivots > tolerance):
            beta = scipy.linalg.cho_solve((factor, lower), ip.c, check_finite=False)
            return beta, list(range(size))
    except np.linalg.LinAlgError:
        pass
    kept = _independent_columns(ip.B, tolerance)
    aliased = sorted(set(range(size)) - set(kept))
    if not allow_aliased:
        raise SingularSystem(f'Normal equations are rank deficient, aliased columns: {aliased}')
    beta = np.zeros(size)
    if kept:
        sub = ip.B[np.ix_(kept, kept)]
        factor = scipy.linalg.cho_factor(sub, lower=True, check_finite=False)
        beta[kept] = scipy.linalg.cho_solve(factor, ip.c[kept], check_finite=False)
    return beta, kept


def fit_from_inner_products(ip, allow_aliased=False):
    """
    Least-squares fit from accumulated inner products.

    SSE uses the normal-equation identity d - beta^T B beta, which equals
    d - beta^T c at the solution; tiny negative values are clamped to 0.
    With `allow_aliased`, dependent columns get a zero coefficient instead of
    raising SingularSystem.
    """
    beta, kept = _solve(ip, allow_aliased)
    sse = ip.d - float(beta[kept] @ ip.c[kept])
    if sse < 0.0:
        sse = 0.0
    aliased = tuple(sorted(set(range(ip.n_params)) - set(kept)))
    return LinearFit(
        beta=beta,
        sse=sse,
        n_obs=ip.count,
        n_params=ip.n_params,
        rank=len(kept),
        aliased=aliased,
    )


def fit_least_squares(predictors, targets, allow_aliased=False):
    """Direct least-squares fit of targets on [1, predictors]."""
    ip = InnerProducts.from_rows(predictors, targets)
    if ip.count == 0:
        raise setartree.shared.EmptyTrainingSet('Cannot fit a model on zero rows')
    return fit_from_inner_products(ip, allow_aliased=allow_aliased)


@dataclasses.dataclass(frozen=True)
class StackedInnerProducts:
    """Inner products of k row sets with the same layout, stacked on the first axis."""
    B: np.ndarray
    c: np.ndarray
    d: np.ndarray
    count: np.ndarray

    def __len__(self):
        return self.count.shape[0]

    @property
    def n_params(self):
        return self.c.shape[-1]

    def take(self, index):
        return StackedInnerProducts(
            B=self.B[index], c=self.c[index], d=self.d[index], count=self.count[index])

    def at(self, index):
        return InnerProducts(
            B=self.B[index], c=self.c[index], d=float(self.d[index]),
            count=int(self.count[index]))

    def complement(self, parent):
        """Inner products of the parent rows outside each stacked row set."""
        _check_same_layout(parent, self)
        return StackedInnerProducts(
            B=parent.B - self.B,
            c=parent.c - self.c,
            d=parent.d - self.d,
            count=parent.count - self.count,
        )


@dataclasses.dataclass(frozen=True)
class StackedFits:
    """Fits of stacked inner products as parallel arrays."""
    beta: np.ndarray
    sse: np.ndarray
    rank: np.ndarray
    count: np.ndarray
    aliased: tuple

    def __len__(self):
        return self.sse.shape[0]

    def fit(self, index):
        return LinearFit(
            beta=self.beta[index],
            sse=float(self.sse[index]),
            n_obs=int(self.count[index]),
            n_params=self.beta.shape[1],
            rank=int(self.rank[index]),
            aliased=self.aliased[index],
        )


def prefix_inner_products(predictors, targets, cuts):
    """
    Inner products of rows [0, cut) for every cut of a nondecreasing sequence.

    Each block of rows between consecutive cuts is multiplied out once and
    the blocks are summed cumulatively.
    """
    predictors = np.asarray(predictors, dtype=float)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    cuts = np.asarray(cuts, dtype=np.int64).reshape(-1)
    if np.any(np.diff(cuts) < 0) or (cuts.size and (cuts[0] < 0 or cuts[-1] > len(targets))):
        raise ValueError(f'Cuts must be nondecreasing within [0, {len(targets)}]')
    design = _with_intercept(predictors)
    size = design.shape[1]
    block_B = np.zeros((cuts.size, size, size))
    block_c = np.zeros((cuts.size, size))
    block_d = np.zeros(cuts.size)
    start = 0
    for idx, stop in enumerate(cuts):
        if stop > start:
            block = design[start:stop]
            block_y = targets[start:stop]
            block_B[idx] = block.T @ block
            block_c[idx] = block.T @ block_y
            block_d[idx] = block_y @ block_y
        start = stop
    return StackedInnerProducts(
        B=np.cumsum(block_B, axis=0),
        c=np.cumsum(block_c, axis=0),
        d=np.cumsum(block_d),
        count=cuts.copy(),
    )


def _stacked_cholesky(B):
    """Cholesky factors of each stacked matrix and a mask of the ones that factored."""
    try:
        return np.linalg.cholesky(B), np.ones(B.shape[0], dtype=bool)
    except np.linalg.LinAlgError:
        pass
    factors = np.zeros_like(B)
    factored = np.zeros(B.shape[0], dtype=bool)
    for idx in range(B.shape[0]):
        try:
            factors[idx] = np.linalg.cholesky(B[idx])
        except np.linalg.LinAlgError:
            continue
        factored[idx] = True
    return factors, factored


def fit_stacked(stacked, allow_aliased=True):
    """
    Fit every stacked system at once.

    Well-conditioned systems are solved together through their Cholesky
    factors. The rest go through `fit_from_inner_products` one by one.
    """
    k, size = len(stacked), stacked.n_params
    beta = np.zeros((k, size))
    sse = np.zeros(k)
    rank = np.full(k, size, dtype=np.int64)
    aliased = [()] * k
    if k == 0:
        return StackedFits(beta=beta, sse=sse, rank=rank, count=stacked.count, aliased=())
    scale = np.max(np.diagonal(stacked.B, axis1=1, axis2=2), axis=1)
    factors, factored = _stacked_cholesky(stacked.B)
    pivots = np.diagonal(factors, axis1=1, axis2=2) ** 2
    solved = factored & (scale > 0.0) & np.all(pivots > RANK_TOLERANCE * scale[:, None], axis=1)
    if solved.any():
        lower = factors[solved]
        half = np.linalg.solve(lower, stacked.c[solved][..., None])
        beta[solved] = np.linalg.solve(np.swapaxes(lower, 1, 2), half)[..., 0]
        sse[solved] = stacked.d[solved] - np.einsum('ij,ij->i', beta[solved], stacked.c[solved])
    for idx in np.flatnonzero(~solved):
        fit = fit_from_inner_products(stacked.at(idx), allow_aliased=allow_aliased)
        beta[idx] = fit.beta
        sse[idx] = fit.sse
        rank[idx] = fit.rank
        aliased[idx] = fit.aliased
    np.maximum(sse, 0.0, out=sse)
    return StackedFits(beta=beta, sse=sse, rank=rank, count=stacked.count, aliased=tuple(aliased))


def residual_sse(fit, predictors, targets):
    """Row-by-row sum of squared residuals of `fit`."""
    residuals = np.asarray(targets, dtype=float) - fit.predict(predictors)
    return float(residuals @ residuals)


if __name__ == '__main__':
    pass
