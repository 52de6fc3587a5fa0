"""Normal and chi-square special functions plus small inference utilities.

Everything here is pure Python on floats; no scipy dependency. The
incomplete gamma function uses the usual series / continued-fraction split.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DegenerateDataError, DomainError

_BISECT_WIDTH = 1e-12
_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


@dataclass(frozen=True)
class Quantile:
    p: float
    value: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not math.isfinite(self.value):
            raise DomainError("quantile value must be finite")


@dataclass(frozen=True)
class IntervalResult:
    lo: float
    hi: float
    level: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"lo={self.lo} exceeds hi={self.hi}")

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, value):
        return self.lo <= value <= self.hi


def _check_prob(p):
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise DomainError(f"probability must lie strictly in (0, 1), got {p!r}")


def normal_cdf(x):
    """Standard normal CDF, using erfc so the lower tail keeps relative accuracy."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _bisect(f, lo, hi, width=_BISECT_WIDTH):
    # f(lo) < 0 <= f(hi) is assumed
    for _ in range(200):
        if hi - lo <= width * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def normal_quantile(p):
    """Inverse of the standard normal CDF.

    Solved by bisection on ``normal_cdf`` down to a 1e-12 bracket, which is
    well inside the 1e-9 accuracy the callers need.
    """
    _check_prob(p)
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # antisymmetry keeps the upper tail as accurate as the lower one
        return -normal_quantile(1.0 - p)
    lo, hi = -40.0, 0.0
    return _bisect(lambda x: normal_cdf(x) - p, lo, hi)


def _gamma_series(a, x):
    # lower regularized P(a, x) by the power series
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # upper regularized Q(a, x) by Lentz's continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a, x):
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise DomainError("shape must be positive")
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def _check_dof(k):
    if int(k) != k or k < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {k!r}")


def chi2_cdf(x, k):
    _check_dof(k)
    if not x >= 0:
        raise DomainError(f"chi-square CDF needs x >= 0, got {x!r}")
    if math.isinf(x):
        return 1.0
    return regularized_gamma_p(0.5 * k, 0.5 * x)


def chi2_quantile(p, k):
    """x such that ``chi2_cdf(x, k) == p``, by bracketed bisection."""
    _check_prob(p)
    _check_dof(k)
    hi = max(1.0, float(k))
    while chi2_cdf(hi, k) < p:
        hi *= 2.0
    return _bisect(lambda x: chi2_cdf(x, k) - p, 0.0, hi)


def gaussian_mean_lr_interval(samples: Sequence[float], alpha: float) -> IntervalResult:
    """Likelihood-ratio interval for the mean of normal data.

    Returns ``mean +- z_{1-alpha/2} * sqrt(s2 / n)`` where ``s2`` is the
    unbiased sample variance. This is the z-based large-sample form.
    """
    _check_prob(alpha)
    ys = [float(y) for y in samples]
    n = len(ys)
    if n < 2:
        raise DegenerateDataError("need at least two samples")
    mean = math.fsum(ys) / n
    ss = math.fsum((y - mean) ** 2 for y in ys)
    if ss == 0.0:
        raise DegenerateDataError("samples have zero variance")
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(ss / (n * (n - 1)))
    return IntervalResult(mean - half, mean + half, 1.0 - alpha)


def ks_distance(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``samples`` and ``cdf``."""
    xs = sorted(float(s) for s in samples)
    n = len(xs)
    if n == 0:
        raise DomainError("ks_distance needs at least one sample")
    d = 0.0
    for i, x in enumerate(xs):
        f = cdf(x)
        d = max(d, (i + 1) / n - f, f - i / n)
    return min(max(d, 0.0), 1.0)
