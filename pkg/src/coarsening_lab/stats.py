"""Estimators shared by the experiments: Wilson intervals and log-slope fits.

Wilson (not Wald) intervals because most of the experiments live near
probability 0 or 1.  Zero-success cells are carried as one-sided intervals
and flagged as censored for slope fits, never log-transformed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np


@dataclass(frozen=True)
class BinomialEstimate:
    successes: int
    trials: int
    estimate: float
    lo: float
    hi: float
    confidence: float = 0.95

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.estimate <= self.hi <= 1.0):
            raise AssertionError("interval must sit inside [0,1] around the estimate")

    @property
    def std_error(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1.0 - p), 1.0 / self.trials) / self.trials)

    def overlaps(self, other: "BinomialEstimate") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> BinomialEstimate:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0,1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    n = trials
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    lo = max(0.0, center - half)
    hi = min(1.0, center + half)
    return BinomialEstimate(successes, trials, p, min(lo, p), max(hi, p), confidence)


def z_score_of_difference(a: BinomialEstimate, b: BinomialEstimate) -> float:
    """(p_a - p_b) over the combined standard error of two independent estimates."""
    se = math.hypot(a.std_error, b.std_error)
    return (a.estimate - b.estimate) / se


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float  # sum of squared residuals of log p
    n_points: int
    n_censored: int


def fit_log_slope(points) -> SlopeFit:
    """Ordinary least squares of log p-hat against t.

    points: iterable of (t, p_hat) with p_hat in (0, 1]; cells with p_hat = 0
    must be removed upstream (they are reported via n_censored by
    fit_log_slope_censored).
    """
    pts = [(float(t), float(p)) for t, p in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(not 0.0 < p <= 1.0 for _, p in pts):
        raise ValueError("p values must be in (0, 1]")
    t = np.array([x for x, _ in pts])
    y = np.log(np.array([p for _, p in pts]))
    (slope, intercept), res, *_ = np.polyfit(t, y, 1, full=True)
    ssr = float(res[0]) if res.size else 0.0
    return SlopeFit(float(slope), float(intercept), ssr, len(pts), 0)


def fit_log_slope_censored(points) -> SlopeFit:
    """Same fit with zero cells dropped and counted, not log-transformed."""
    pts = [(float(t), float(p)) for t, p in points]
    kept = [(t, p) for t, p in pts if p > 0.0]
    fit = fit_log_slope(kept)
    return SlopeFit(fit.slope, fit.intercept, fit.residual, fit.n_points, len(pts) - len(kept))
