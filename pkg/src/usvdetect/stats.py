"""Paired t-tests with a self-contained Student-t tail probability.

The two-tailed p-value uses the identity p = I_x(dof/2, 1/2) with
x = dof / (dof + t^2), where I is the regularized incomplete beta function,
evaluated here with a modified Lentz continued fraction (target relative
error 1e-12). Nothing here depends on an external statistics routine, so the
closed forms for 1 and 2 degrees of freedom make independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_MAX_ITER = 400
_EPS = 1e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed to converge "
                       f"(a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function, for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError(f"a and b must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # the continued fraction converges fast for x below the distribution bulk;
    # otherwise use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, dof: int) -> float:
    """Two-tailed p-value of a Student-t statistic with dof degrees of freedom."""
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


@dataclass(frozen=True)
class TTestResult:
    """Paired t-test outcome: statistic, two-tailed p-value, degrees of freedom."""

    t: float
    p: float
    dof: int
    mean_diff: float


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed paired t-test of matched samples a and b.

    t = mean(d) / (sd(d) / sqrt(n)) with d = a - b and sample SD (n-1
    denominator). A zero-variance difference yields t = 0, p = 1 when the mean
    difference is zero, and t = +/-inf, p = 0 otherwise. Swapping a and b
    negates t exactly and leaves p unchanged.
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 1:
        raise ValueError("paired_t_test expects two 1-D sequences of equal length")
    n = a_arr.shape[0]
    if n < 2:
        raise ValueError(f"paired_t_test needs at least 2 pairs, got {n}")
    d = a_arr - b_arr
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    dof = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p=1.0, dof=dof, mean_diff=mean)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p=0.0, dof=dof, mean_diff=mean)
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t=t, p=student_t_two_tailed_p(t, dof), dof=dof, mean_diff=mean)
