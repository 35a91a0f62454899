"""
Principal branch of the Lambert W function.

Halley iteration from the usual starting points: the branch-point series
near -1/e, log1p for moderate arguments and the log - log log asymptote for
large ones.
"""

import math

import numpy as np

from fleet.exceptions import LambertDomainError

BRANCH_POINT = -1.0 / math.e
MAX_ITERATIONS = 64

# Above this exponent e^y overflows a double
_EXP_LIMIT = 700.0


def _initial_guess(x):
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    if x < 3.0:
        return math.log1p(x)
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x):
    """W_0(x), the solution w >= -1 of w e^w = x, for x >= -1/e."""
    x = float(x)
    if math.isnan(x):
        raise LambertDomainError('argument is NaN')
    if x <= BRANCH_POINT:
        # Accept round-off at the branch point itself
        if BRANCH_POINT - x > 4.0 * np.finfo(float).eps:
            raise LambertDomainError(f'W0 is undefined for {x!r} < -1/e')
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    w = _initial_guess(x)
    for _ in range(MAX_ITERATIONS):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denominator = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denominator == 0.0:
            break
        delta = f / denominator
        w -= delta
        if abs(delta) <= 4.0 * np.finfo(float).eps * (2.0 + abs(w)):
            break
    return max(w, -1.0)


def lambert_w0_exp(y):
    """W_0(e^y), stable for exponents whose power would overflow."""
    y = float(y)
    if y < _EXP_LIMIT:
        return lambert_w0(math.exp(y))
    # Solve w + ln w = y by Newton from the asymptote
    w = y - math.log(y)
    for _ in range(MAX_ITERATIONS):
        delta = (w + math.log(w) - y) / (1.0 + 1.0 / w)
        w -= delta
        if abs(delta) <= 4.0 * np.finfo(float).eps * w:
            break
    return w
