"""Paired t-tests and t-intervals.

The statistics are computed directly from the sample moments; only the
Student-t distribution function and its inverse come from ``scipy.special``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

ALPHA = 0.05


@dataclass(frozen=True)
class TTestResult:
    mean_diff: float
    t: float
    p: float
    significant: bool
    n: int


@dataclass(frozen=True)
class Interval:
    mean: float
    half_width: float
    n: int

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width


def t_sf_two_sided(t: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ Student-t(df), via the regularized incomplete beta."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return float(special.betainc(df / 2.0, 0.5, x))


def t_quantile(q: float, df: int) -> float:
    return float(special.stdtrit(df, q))


def paired_t_test(a: Sequence[float], b: Sequence[float], alpha: float = ALPHA) -> TTestResult:
    """Two-sided paired t-test of mean(a - b) = 0.

    All-zero differences give p = 1 (not significant, t undefined); zero
    variance with a nonzero mean gives an infinite t and p = 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be equal-length 1-d sequences")
    return one_sample_t_test(a - b, alpha)


def one_sample_t_test(diffs: Sequence[float], alpha: float = ALPHA) -> TTestResult:
    x = np.asarray(diffs, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two paired observations")
    mean = math.fsum(x) / n
    var = math.fsum((x - mean) ** 2) / (n - 1)
    if np.all(x == 0):
        return TTestResult(0.0, math.nan, 1.0, False, n)
    if var == 0.0:
        return TTestResult(mean, math.copysign(math.inf, mean), 0.0, True, n)
    t = mean / math.sqrt(var / n)
    p = t_sf_two_sided(t, n - 1)
    return TTestResult(mean, t, p, p < alpha, n)


def t_interval(x: Sequence[float], level: float = 0.95) -> Interval:
    """Mean and half-width of the two-sided t confidence interval (n-1 dof)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return Interval(math.nan, math.nan, 0)
    mean = math.fsum(x) / n
    if n == 1:
        return Interval(mean, math.nan, 1)
    sd = math.sqrt(math.fsum((x - mean) ** 2) / (n - 1))
    half = t_quantile(0.5 + level / 2.0, n - 1) * sd / math.sqrt(n)
    return Interval(mean, half, n)
