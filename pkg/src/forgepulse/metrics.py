"""Productivity and diversity statistics.

Spearman's rank correlation is computed as the Pearson correlation of
average ranks, which handles tied monthly counts; on tie-free data it equals
the closed form 1 - 6*sum(d^2) / (n*(n^2-1)) exactly.  The diversity index is
the square root of the inverse Simpson index over organization commit
shares.  The contribution-tail exponent is a shifted discrete Hill/MLE
estimate; it is a diagnostic, not a goodness-of-fit claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import MetricError
from .series import MonthlySeries


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    n: int
    used_tie_correction: bool


@dataclass(frozen=True)
class TrendResult:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class DiversityResult:
    simpson: float
    diversity: float
    n_units: int
    shares: dict[str, float]


@dataclass(frozen=True)
class TailResult:
    alpha_hat: float
    x_min: int
    n_tail: int


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean rank of the tie group."""
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    ranks = np.empty(len(values), dtype=float)
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _as_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.ndim != 1 or yv.ndim != 1 or len(xv) != len(yv):
        raise MetricError("x and y must be one-dimensional sequences of equal length")
    if len(xv) < 2:
        raise MetricError("need at least 2 observations")
    return xv, yv


def spearman(x: Sequence[float], y: Sequence[float]) -> SpearmanResult:
    """Rank correlation of two equal-length sequences.

    Raises MetricError for mismatched lengths, n < 2, or a constant sequence
    (rank correlation is undefined there).
    """
    xv, yv = _as_pair(x, y)
    if len(np.unique(xv)) < 2 or len(np.unique(yv)) < 2:
        raise MetricError("constant sequence: rank correlation undefined")
    ties = len(np.unique(xv)) < len(xv) or len(np.unique(yv)) < len(yv)
    rx = average_ranks(xv)
    ry = average_ranks(yv)
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))
    rho = max(-1.0, min(1.0, rho))
    return SpearmanResult(rho=rho, n=len(xv), used_tie_correction=ties)


def spearman_distinct_ranks(x: Sequence[float], y: Sequence[float]) -> float:
    """Closed form 1 - 6*sum(d^2)/(n(n^2-1)); valid only when neither input
    has ties.  Kept as the independent cross-check for `spearman`."""
    xv, yv = _as_pair(x, y)
    n = len(xv)
    if len(np.unique(xv)) < n or len(np.unique(yv)) < n:
        raise MetricError("closed form requires distinct ranks (no ties)")
    rx = np.empty(n)
    ry = np.empty(n)
    rx[np.argsort(xv)] = np.arange(1, n + 1)
    ry[np.argsort(yv)] = np.arange(1, n + 1)
    d = rx - ry
    return float(1.0 - 6.0 * float(d @ d) / (n * (n * n - 1)))


def linear_trend(x: Sequence[float], y: Sequence[float]) -> TrendResult:
    """Ordinary least squares with intercept; R^2 = 1 - SSE/SST.

    A constant y has SST = 0 and is reported as r_squared = 0 by convention.
    Constant x is a domain error.
    """
    xv, yv = _as_pair(x, y)
    xc = xv - xv.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise MetricError("constant x: trend undefined")
    slope = float(xc @ (yv - yv.mean())) / sxx
    intercept = float(yv.mean() - slope * xv.mean())
    residuals = yv - (slope * xv + intercept)
    sse = float(residuals @ residuals)
    sst = float((yv - yv.mean()) @ (yv - yv.mean()))
    r_squared = 0.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - sse / sst))
    return TrendResult(slope=slope, intercept=intercept, r_squared=r_squared)


def org_shares(series: MonthlySeries, window: int | str = "all") -> dict[str, float]:
    """Commit-share per organizational unit over a window of months.

    window="all" covers the full history; an integer k takes the trailing k
    months.  The window must contain at least one commit.
    """
    points = series.points
    if isinstance(window, int):
        if window < 1:
            raise MetricError(f"window must be positive, got {window}")
        points = points[-window:]
    elif window != "all":
        raise MetricError(f"window must be 'all' or a positive integer, got {window!r}")
    totals: dict[str, int] = {}
    for point in points:
        for key, count in point.org_commits.items():
            totals[key] = totals.get(key, 0) + count
    grand_total = sum(totals.values())
    if grand_total == 0:
        raise MetricError("window contains no commits")
    return {key: count / grand_total for key, count in totals.items()}


SHARE_SUM_TOLERANCE = 1e-9


def diversity(shares: Mapping[str, float]) -> DiversityResult:
    """Simpson index S = sum(p_i^2) and diversity index D = sqrt(1/S).

    Shares must be nonnegative and sum to 1 within 1e-9.  Units with zero
    share do not count toward n_units.
    """
    if not shares:
        raise MetricError("no shares given")
    values = list(shares.values())
    if any(p < 0 for p in values):
        raise MetricError("negative share")
    total = math.fsum(values)
    if abs(total - 1.0) > SHARE_SUM_TOLERANCE:
        raise MetricError(f"shares sum to {total!r}, not 1")
    simpson = math.fsum(p * p for p in values)
    return DiversityResult(
        simpson=simpson,
        diversity=math.sqrt(1.0 / simpson),
        n_units=sum(1 for p in values if p > 0),
        shares=dict(shares),
    )


MIN_TAIL_POINTS = 10


def contribution_tail(per_contributor_commits: Sequence[int], min_tail_points: int = MIN_TAIL_POINTS) -> TailResult:
    """Tail exponent of the per-contributor commit-count distribution.

    Shifted discrete MLE over the tail x >= x_min:

        alpha_hat = 1 + n_tail / sum(ln(x_i / (x_min - 0.5)))

    x_min starts at the 50th percentile of the counts and is lowered to the
    next smaller observed value until the tail holds at least
    ``min_tail_points`` points.  Errors: fewer than ``min_tail_points``
    counts overall, nonpositive counts, or a tail without variation.
    """
    counts = np.asarray(per_contributor_commits)
    if len(counts) < min_tail_points:
        raise MetricError(f"need at least {min_tail_points} contributors, got {len(counts)}")
    if np.any(counts <= 0):
        raise MetricError("contributor commit counts must be positive")
    xs = np.sort(counts.astype(float))
    unique_desc = sorted(set(xs.tolist()), reverse=True)
    threshold = float(np.percentile(xs, 50.0))
    feasible = [v for v in unique_desc if v >= threshold]
    x_min = min(feasible) if feasible else unique_desc[0]
    while int(np.count_nonzero(xs >= x_min)) < min_tail_points:
        lower = [v for v in unique_desc if v < x_min]
        if not lower:
            raise MetricError("too few tail points")
        x_min = max(lower)
    tail = xs[xs >= x_min]
    if tail.max() == tail.min():
        raise MetricError("no tail variation")
    log_terms = np.log(tail / (x_min - 0.5))
    alpha_hat = 1.0 + len(tail) / float(np.sum(log_terms))
    return TailResult(alpha_hat=alpha_hat, x_min=int(x_min), n_tail=int(len(tail)))
