"""
Regularized incomplete beta function and the F-distribution upper tail.

The continued fraction is evaluated with the modified Lentz method, switching
to the symmetry relation I_x(a, b) = 1 - I_{1-x}(b, a) when x > (a+1)/(a+b+2).
"""
import math
import sys

import setartree.shared

MAX_ITERATIONS = 300
EPSILON = 1e-15
_TINY = sys.float_info.min / sys.float_info.epsilon


class NonConvergence(setartree.shared.NumericalError):
    pass


def _beta_continued_fraction(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    result = d
    for m in range(1, MAX_ITERATIONS + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        result *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        result *= delta
        if abs(delta - 1.0) < EPSILON:
            return result
    raise NonConvergence(
        f'Incomplete beta continued fraction did not converge: a={a}, b={b}, x={x}')


def reg_inc_beta(a, b, x):
    """I_x(a, b) for a > 0, b > 0 and 0 <= x <= 1."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f'Beta parameters must be positive: a={a}, b={b}')
    if not 0.0 <= x <= 1.0:
        raise ValueError(f'x must be in [0, 1]: {x}')
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    log_front = log_norm + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_continued_fraction(a, b, x) / a
    else:
        value = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, value))


def f_upper_tail(f, df1, df2):
    """P(F > f) for an F(df1, df2) variable."""
    if df1 < 1 or df2 < 1:
        raise ValueError(f'Degrees of freedom must be >= 1: df1={df1}, df2={df2}')
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, x)


if __name__ == '__main__':
    pass
