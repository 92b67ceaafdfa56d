"""Self-contained statistical routines: incomplete beta, Student t, Welch, Pearson.

Tail probabilities use the Lentz continued fraction for the regularized
incomplete beta function, accurate to roughly 1e-14 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import ConstantSeries

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
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
    raise ArithmeticError(f"incomplete beta failed to converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Upper tail ``P(T > t)`` of Student's t."""
    if math.isnan(t) or math.isnan(df):
        return math.nan
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    if math.isinf(df):
        return normal_sf(t)
    t2 = t * t
    if t2 < df:
        # near zero the complementary form avoids cancellation
        central = betainc(0.5, 0.5 * df, t2 / (df + t2))
        return 0.5 * (1.0 - central) if t >= 0 else 0.5 * (1.0 + central)
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2))
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    return t_sf(-t, df)


def t_ppf(q: float, df: float) -> float:
    """Inverse CDF of Student's t by bisection."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    lo, hi = -1.0, 1.0
    while t_cdf(lo, df) > q:
        lo *= 2.0
    while t_cdf(hi, df) < q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float  # two-tailed


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sample t-test without assuming equal variances, two-tailed p."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    n1, n2 = len(x), len(y)
    if n1 < 2 or n2 < 2:
        return WelchResult(math.nan, math.nan, math.nan)
    m1, m2 = math.fsum(x) / n1, math.fsum(y) / n2
    v1 = math.fsum((x - m1) ** 2) / (n1 - 1)
    v2 = math.fsum((y - m2) ** 2) / (n2 - 1)
    se1, se2 = v1 / n1, v2 / n2
    se = se1 + se2
    diff = m1 - m2
    if se == 0.0:
        if diff == 0.0:
            return WelchResult(0.0, math.nan, 1.0)
        return WelchResult(math.copysign(math.inf, diff), math.nan, 0.0)
    t = diff / math.sqrt(se)
    df = se * se / (se1 * se1 / (n1 - 1) + se2 * se2 / (n2 - 1))
    p = min(1.0, 2.0 * t_sf(abs(t), df))
    return WelchResult(t, df, p)


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if len(xa) != len(ya):
        raise ValueError("series differ in length")
    if len(xa) < 3:
        raise ValueError("need at least 3 points")
    dx = xa - math.fsum(xa) / len(xa)
    dy = ya - math.fsum(ya) / len(ya)
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSeries("Pearson correlation undefined for a constant series")
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_lower_p(r: float, n: int) -> float:
    """One-tailed p for the alternative r < 0."""
    if r <= -1.0:
        return 0.0
    if r >= 1.0:
        return 1.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_cdf(t, n - 2)


def proportion_ci(k: int, n: int) -> float:
    """95% normal-approximation half-width of a proportion, in the proportion's units."""
    if n == 0:
        return math.nan
    p = k / n
    return Z95 * math.sqrt(p * (1.0 - p) / n)


def mean_ci(values: Sequence[float]) -> float:
    """95% t-based half-width of a mean."""
    n = len(values)
    if n < 2:
        return math.nan
    sd = float(np.std(values, ddof=1))
    return t_ppf(0.975, n - 1) * sd / math.sqrt(n)


def box_stats(values: Sequence[float]) -> dict:
    """Boxplot summary with whiskers at 1.5 IQR (linear-interpolated quartiles)."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if len(x) == 0:
        return {"n": 0, "mean": math.nan, "median": math.nan, "q1": math.nan, "q3": math.nan,
                "whisker_low": math.nan, "whisker_high": math.nan, "outliers": []}
    q1, med, q3 = (float(v) for v in np.quantile(x, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    return {
        "n": int(len(x)),
        "mean": math.fsum(x) / len(x),
        "median": med,
        "q1": q1,
        "q3": q3,
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(v) for v in x[(x < lo_fence) | (x > hi_fence)]],
    }
