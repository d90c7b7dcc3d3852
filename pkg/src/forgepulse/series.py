"""Calendar-month aggregation of commit records, smoothing, and eligibility.

Months are UTC calendar months.  A contributor or organization is "active"
in a month when it has at least one commit in that month.  Interior months
without activity are materialized as zero points so the time axis is true;
leading/trailing inactivity is not padded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IdentityError, SeriesError
from .identity import DomainClass, IdentityConfig, OrgUnit, normalize_email, resolve_org
from .ingest import CommitRecord

SMOOTHABLE_FIELDS = ("active_contributors", "commits", "active_orgs")


@dataclass(frozen=True, order=True)
class MonthKey:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise SeriesError(f"month out of range: {self.month}")

    @property
    def index(self) -> int:
        return self.year * 12 + self.month - 1

    @classmethod
    def from_index(cls, index: int) -> "MonthKey":
        return cls(index // 12, index % 12 + 1)

    @classmethod
    def from_datetime(cls, stamp: datetime) -> "MonthKey":
        return cls(stamp.year, stamp.month)

    @classmethod
    def parse(cls, text: str) -> "MonthKey":
        try:
            year_text, month_text = text.split("-")
            return cls(int(year_text), int(month_text))
        except (ValueError, SeriesError) as exc:
            raise SeriesError(f"bad month key {text!r}") from exc

    def shift(self, months: int) -> "MonthKey":
        return MonthKey.from_index(self.index + months)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class MonthlyPoint:
    month: MonthKey
    active_contributors: int
    commits: int
    active_orgs: int
    org_commits: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class MonthlySeries:
    """Gap-filled monthly points plus whole-history contributor totals.

    ``contributor_commits`` maps each contributor key to its total commit
    count over the full history; it feeds the contribution-distribution tail
    estimate and life-span totals, which are not derivable from the monthly
    points alone.
    """

    points: tuple[MonthlyPoint, ...]
    origin: MonthKey
    contributor_commits: dict[str, int] = field(default_factory=dict)

    @property
    def total_contributors(self) -> int:
        return len(self.contributor_commits)

    @property
    def total_orgs(self) -> int:
        keys: set[str] = set()
        for point in self.points:
            keys.update(point.org_commits)
        return len(keys)

    @property
    def total_commits(self) -> int:
        return sum(point.commits for point in self.points)

    @property
    def mean_monthly_commits(self) -> float:
        return self.total_commits / len(self.points)

    def values(self, field_name: str) -> list[int]:
        if field_name not in SMOOTHABLE_FIELDS:
            raise SeriesError(f"unknown series field {field_name!r}")
        return [getattr(point, field_name) for point in self.points]

    def org_totals(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for point in self.points:
            for key, count in point.org_commits.items():
                totals[key] = totals.get(key, 0) + count
        return totals


def _fallback_unit(raw_email: str) -> tuple[str, OrgUnit]:
    # Garbage author emails (no "@", etc.) still identify a contributor
    # string; attribute them deterministically instead of failing the run.
    key = raw_email.strip().lower() or "<no-email>"
    return key, OrgUnit(key, DomainClass.UNKNOWN)


def build_monthly_series(
    records: Iterable[CommitRecord],
    config: IdentityConfig = IdentityConfig(),
) -> MonthlySeries:
    """Aggregate records into a gap-filled monthly series.

    Merge commits are ignored.  Records whose email cannot be normalized are
    attributed to an Unknown one-person unit keyed by the trimmed, lowercased
    raw string, so every non-merge record lands in exactly one month bucket
    (conservation: sum of monthly commit counts equals the non-merge record
    count).  Order-insensitive.
    """
    unit_cache: dict[str, OrgUnit] = {}
    month_commits: dict[int, int] = {}
    month_contributors: dict[int, set[str]] = {}
    month_org_commits: dict[int, dict[str, int]] = {}
    contributor_commits: dict[str, int] = {}

    for record in records:
        if record.is_merge:
            continue
        try:
            key = normalize_email(record.author_email)
        except IdentityError:
            key, unit = _fallback_unit(record.author_email)
            unit_cache.setdefault(key, unit)
        unit = unit_cache.get(key)
        if unit is None:
            unit = resolve_org(key, config)
            unit_cache[key] = unit
        index = MonthKey.from_datetime(record.authored_at).index
        month_commits[index] = month_commits.get(index, 0) + 1
        month_contributors.setdefault(index, set()).add(key)
        orgs = month_org_commits.setdefault(index, {})
        orgs[unit.key] = orgs.get(unit.key, 0) + 1
        contributor_commits[key] = contributor_commits.get(key, 0) + 1

    if not month_commits:
        raise SeriesError("no records to aggregate (empty series)")

    first, last = min(month_commits), max(month_commits)
    points = []
    for index in range(first, last + 1):
        orgs = month_org_commits.get(index, {})
        points.append(
            MonthlyPoint(
                month=MonthKey.from_index(index),
                active_contributors=len(month_contributors.get(index, ())),
                commits=month_commits.get(index, 0),
                active_orgs=len(orgs),
                org_commits=orgs,
            )
        )
    return MonthlySeries(
        points=tuple(points),
        origin=MonthKey.from_index(first),
        contributor_commits=contributor_commits,
    )


def moving_average(values: Sequence[float], window: int = 3) -> list[float]:
    """Centered moving average; the window shrinks at the edges.

    Window must be odd and positive.  window=1 is the identity.
    """
    if window < 1 or window % 2 == 0:
        raise SeriesError(f"window must be odd and positive, got {window}")
    half = window // 2
    n = len(values)
    out = []
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def smooth(series: MonthlySeries, field_name: str = "active_contributors", window: int = 3) -> list[float]:
    """Low-pass filter one monthly count with a centered moving average."""
    if not series.points:
        raise SeriesError("cannot smooth an empty series")
    return moving_average(series.values(field_name), window)


@dataclass(frozen=True)
class EligibilityThresholds:
    min_total_contributors: int = 100
    min_total_orgs: int = 20
    min_mean_monthly_commits: float = 100.0


@dataclass(frozen=True)
class EligibilityReport:
    contributors_ok: bool
    orgs_ok: bool
    commit_rate_ok: bool

    @property
    def eligible(self) -> bool:
        return self.contributors_ok and self.orgs_ok and self.commit_rate_ok

    def to_dict(self) -> dict:
        return {
            "contributors_ok": self.contributors_ok,
            "orgs_ok": self.orgs_ok,
            "commit_rate_ok": self.commit_rate_ok,
            "eligible": self.eligible,
        }


def check_eligibility(summary, thresholds: EligibilityThresholds = EligibilityThresholds()) -> EligibilityReport:
    """Check study-inclusion thresholds over a project's full history.

    ``summary`` is any object exposing total_contributors, total_orgs and
    mean_monthly_commits (a ProjectSummary or a MonthlySeries).
    """
    return EligibilityReport(
        contributors_ok=summary.total_contributors >= thresholds.min_total_contributors,
        orgs_ok=summary.total_orgs >= thresholds.min_total_orgs,
        commit_rate_ok=summary.mean_monthly_commits >= thresholds.min_mean_monthly_commits,
    )


def series_to_dict(series: MonthlySeries) -> dict:
    return {
        "origin": str(series.origin),
        "points": [
            {
                "month": str(point.month),
                "active_contributors": point.active_contributors,
                "commits": point.commits,
                "active_orgs": point.active_orgs,
                "org_commits": dict(point.org_commits),
            }
            for point in series.points
        ],
        "contributor_commits": dict(series.contributor_commits),
    }


def series_from_dict(data: dict) -> MonthlySeries:
    points = tuple(
        MonthlyPoint(
            month=MonthKey.parse(entry["month"]),
            active_contributors=int(entry["active_contributors"]),
            commits=int(entry["commits"]),
            active_orgs=int(entry["active_orgs"]),
            org_commits={str(k): int(v) for k, v in entry["org_commits"].items()},
        )
        for entry in data["points"]
    )
    if not points:
        raise SeriesError("series file has no points")
    return MonthlySeries(
        points=points,
        origin=MonthKey.parse(data["origin"]),
        contributor_commits={str(k): int(v) for k, v in data.get("contributor_commits", {}).items()},
    )


def load_series(path: str | Path) -> MonthlySeries:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SeriesError(f"cannot load series {path}: {exc}") from exc
    return series_from_dict(data)
