"""End-to-end project processing and the summary report.

For each configured project: ingest -> monthly series -> metrics -> growth
fits -> summary row.  Per-project artifacts are JSON/CSV files written
atomically; a combined summary table (CSV plus aligned text) collects the
rows.  Eligibility failures are warnings; only processing failures make the
run exit nonzero.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import growth, metrics
from .errors import ConfigError, ForgepulseError, MetricError
from .identity import IdentityConfig, load_identity_config
from .ingest import CommitRecord, acquire_repo_log, parse_log_stream, record_to_dict
from .jsonio import atomic_writer, dumps_stable, write_json_atomic, write_text_atomic
from .series import (
    EligibilityThresholds,
    MonthlySeries,
    build_monthly_series,
    check_eligibility,
    series_to_dict,
    smooth,
)

CACHE_ENV_VAR = "FORGEPULSE_CACHE"


@dataclass(frozen=True)
class ProjectSummary:
    """One report row: life-span totals, typical monthly ranges (5th/95th
    percentiles), and the two headline statistics."""

    project: str
    total_contributors: int
    total_orgs: int
    mean_monthly_commits: float
    active_contrib_range: tuple[float, float]
    monthly_commit_range: tuple[float, float]
    active_org_range: tuple[float, float]
    spearman: float | None
    spearman_reason: str | None
    diversity: float | None
    diversity_reason: str | None
    merge_policy: str
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "project": self.project,
            "total_contributors": self.total_contributors,
            "total_orgs": self.total_orgs,
            "mean_monthly_commits": self.mean_monthly_commits,
            "active_contrib_range": list(self.active_contrib_range),
            "monthly_commit_range": list(self.monthly_commit_range),
            "active_org_range": list(self.active_org_range),
            "spearman": self.spearman,
            "spearman_reason": self.spearman_reason,
            "diversity": self.diversity,
            "diversity_reason": self.diversity_reason,
            "merge_policy": self.merge_policy,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class MetricsReport:
    spearman: metrics.SpearmanResult | None
    spearman_reason: str | None
    trend: metrics.TrendResult | None
    trend_reason: str | None
    diversity: metrics.DiversityResult | None
    diversity_reason: str | None
    tail: metrics.TailResult | None
    tail_reason: str | None
    window: str

    def to_dict(self) -> dict:
        out: dict = {"window": self.window}
        if self.spearman is None:
            out["spearman"] = None
            out["spearman_reason"] = self.spearman_reason
        else:
            out["spearman"] = {
                "rho": self.spearman.rho,
                "n": self.spearman.n,
                "used_tie_correction": self.spearman.used_tie_correction,
            }
        if self.trend is None:
            out["trend"] = None
            out["trend_reason"] = self.trend_reason
        else:
            out["trend"] = {
                "slope": self.trend.slope,
                "intercept": self.trend.intercept,
                "r_squared": self.trend.r_squared,
            }
        if self.diversity is None:
            out["diversity"] = None
            out["diversity_reason"] = self.diversity_reason
        else:
            out["diversity"] = {
                "simpson": self.diversity.simpson,
                "diversity": self.diversity.diversity,
                "n_units": self.diversity.n_units,
                "shares": dict(self.diversity.shares),
            }
        if self.tail is None:
            out["tail"] = None
            out["tail_reason"] = self.tail_reason
        else:
            out["tail"] = {
                "alpha_hat": self.tail.alpha_hat,
                "x_min": self.tail.x_min,
                "n_tail": self.tail.n_tail,
            }
        return out


def compute_metrics(series: MonthlySeries, window: int | str = "all") -> MetricsReport:
    """All four statistics, each independently degrading to null + reason."""
    actives = series.values("active_contributors")
    commits = series.values("commits")

    spearman_result = spearman_reason = None
    trend_result = trend_reason = None
    diversity_result = diversity_reason = None
    tail_result = tail_reason = None
    try:
        spearman_result = metrics.spearman(actives, commits)
    except MetricError as exc:
        spearman_reason = exc.reason
    try:
        trend_result = metrics.linear_trend(actives, commits)
    except MetricError as exc:
        trend_reason = exc.reason
    try:
        diversity_result = metrics.diversity(metrics.org_shares(series, window))
    except MetricError as exc:
        diversity_reason = exc.reason
    try:
        tail_result = metrics.contribution_tail(list(series.contributor_commits.values()))
    except MetricError as exc:
        tail_reason = exc.reason
    return MetricsReport(
        spearman=spearman_result,
        spearman_reason=spearman_reason,
        trend=trend_result,
        trend_reason=trend_reason,
        diversity=diversity_result,
        diversity_reason=diversity_reason,
        tail=tail_result,
        tail_reason=tail_reason,
        window=str(window),
    )


def _percentile_range(values: list[int]) -> tuple[float, float]:
    low, high = np.percentile(np.asarray(values, dtype=float), [5.0, 95.0])
    return float(low), float(high)


def summarize(
    series: MonthlySeries,
    metrics_report: MetricsReport,
    fits: dict[str, growth.GrowthFit] | None = None,
    project: str = "",
    merge_policy: str = "excluded",
) -> ProjectSummary:
    """Assemble the report row from precomputed metrics.

    Monthly ranges are 5th/95th percentiles: the reproducible analogue of
    eyeballed typical ranges, excluding outlier months.
    """
    notes: list[str] = []
    if fits:
        for fit in fits.values():
            for note in fit.notes:
                if note not in notes:
                    notes.append(note)
    return ProjectSummary(
        project=project,
        total_contributors=series.total_contributors,
        total_orgs=series.total_orgs,
        mean_monthly_commits=series.mean_monthly_commits,
        active_contrib_range=_percentile_range(series.values("active_contributors")),
        monthly_commit_range=_percentile_range(series.values("commits")),
        active_org_range=_percentile_range(series.values("active_orgs")),
        spearman=None if metrics_report.spearman is None else metrics_report.spearman.rho,
        spearman_reason=metrics_report.spearman_reason,
        diversity=None if metrics_report.diversity is None else metrics_report.diversity.diversity,
        diversity_reason=metrics_report.diversity_reason,
        merge_policy=merge_policy,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class ProjectSource:
    name: str
    repo: Path | None = None
    log: Path | None = None

    def __post_init__(self):
        if (self.repo is None) == (self.log is None):
            raise ConfigError(f"project {self.name!r} needs exactly one of repo or log")


@dataclass(frozen=True)
class RunConfig:
    projects: tuple[ProjectSource, ...]
    out_dir: Path
    identity: IdentityConfig = IdentityConfig()
    thresholds: EligibilityThresholds = EligibilityThresholds()
    smoothing_window: int = 3
    model: str = "both"  # gompertz | logistic | both
    include_merges: bool = False
    strict: bool = False
    biphase: bool = False
    metrics_window: int | str = "all"
    workers: int = 1

    def __post_init__(self):
        if not self.projects:
            raise ConfigError("config lists no projects")
        if self.model not in ("gompertz", "logistic", "both"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ConfigError("smoothing_window must be odd and positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    base = path.parent

    def resolve(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    projects = []
    for entry in data.get("projects", []):
        name = entry.get("name")
        if not name:
            raise ConfigError(f"project entry without a name: {entry}")
        projects.append(
            ProjectSource(
                name=str(name),
                repo=resolve(entry["repo"]) if "repo" in entry else None,
                log=resolve(entry["log"]) if "log" in entry else None,
            )
        )
    identity = IdentityConfig()
    if "identity_config" in data:
        identity = load_identity_config(resolve(data["identity_config"]))
    try:
        thresholds = EligibilityThresholds(**data.get("thresholds", {}))
    except TypeError as exc:
        raise ConfigError(f"bad thresholds: {exc}") from exc
    window = data.get("metrics_window", "all")
    if window != "all":
        try:
            window = int(window[4:]) if isinstance(window, str) and window.startswith("last") else int(window)
        except ValueError as exc:
            raise ConfigError(f"bad metrics_window {window!r}: use 'all', 'lastN', or a month count") from exc
    return RunConfig(
        projects=tuple(projects),
        out_dir=resolve(data.get("out_dir", "forgepulse-out")),
        identity=identity,
        thresholds=thresholds,
        smoothing_window=int(data.get("smoothing_window", 3)),
        model=str(data.get("model", "both")),
        include_merges=bool(data.get("include_merges", False)),
        strict=bool(data.get("strict", False)),
        biphase=bool(data.get("biphase", False)),
        metrics_window=window,
        workers=int(data.get("workers", 1)),
    )


def models_for(selection: str) -> list[growth.GrowthModel]:
    if selection == "both":
        return [growth.GrowthModel.GOMPERTZ, growth.GrowthModel.LOGISTIC]
    return [growth.GrowthModel(selection)]


def cached_repo_lines(repo: Path, include_merges: bool) -> Iterator[str]:
    """Acquire a repository log, honoring the FORGEPULSE_CACHE directory."""
    cache_dir = os.environ.get(CACHE_ENV_VAR)
    if not cache_dir:
        yield from acquire_repo_log(repo, include_merges=include_merges)
        return
    digest = hashlib.sha1(
        f"{Path(repo).resolve()}|merges={include_merges}".encode()
    ).hexdigest()
    cache_path = Path(cache_dir) / f"{digest}.log"
    if not cache_path.exists():
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        text = "".join(acquire_repo_log(repo, include_merges=include_merges))
        write_text_atomic(cache_path, text)
    with cache_path.open(encoding="utf-8") as handle:
        yield from handle


def _tee_records(records: Iterable[CommitRecord], sink) -> Iterator[CommitRecord]:
    for record in records:
        sink.write(dumps_stable(record_to_dict(record), indent=None) + "\n")
        yield record


def fit_report(
    series: MonthlySeries,
    smoothing_window: int,
    model_selection: str,
    biphase: bool,
) -> tuple[dict, str, dict[str, growth.GrowthFit]]:
    """Fit the selected models; returns (FIT.json payload, CSV sidecar text).

    The sidecar has one row per month: t, month, observed and smoothed active
    contributors, and the fitted value of each model, ready for plotting.
    """
    observed = series.values("active_contributors")
    smoothed = smooth(series, "active_contributors", smoothing_window)
    payload: dict = {
        "field": "active_contributors",
        "smoothing_window": smoothing_window,
        "t_offset": str(series.origin),
        "model_fits": {},
        "phase": None,
        "phase_reason": None,
        "biphase": None,
    }
    fits: dict[str, growth.GrowthFit] = {}
    for model in models_for(model_selection):
        try:
            fits[model.value] = growth.fit_growth(smoothed, model, t_offset=series.origin)
            payload["model_fits"][model.value] = fits[model.value].to_dict()
        except growth.GrowthFitError as exc:
            payload["model_fits"][model.value] = None
            payload[f"{model.value}_reason"] = str(exc)

    best = min(fits.values(), key=lambda f: f.sse) if fits else None
    if best is not None:
        try:
            payload["phase"] = growth.classify_phase(smoothed, best).value
        except growth.GrowthFitError as exc:
            payload["phase_reason"] = str(exc)
    if biphase and fits:
        best_model = growth.GrowthModel(best.params.model.value)
        result = growth.detect_biphase(smoothed, best_model, t_offset=series.origin)
        payload["biphase"] = None if result is None else result.to_dict()

    lines = ["t,month,observed,smoothed" + "".join(f",fitted_{m}" for m in sorted(fits))]
    t_values = range(len(series.points))
    fitted = {name: growth.model_value(np.arange(len(series.points), dtype=float), fit.params)
              for name, fit in fits.items()}
    for t in t_values:
        row = [
            str(t),
            str(series.points[t].month),
            f"{observed[t]:.6g}",
            f"{smoothed[t]:.6g}",
        ]
        row += [f"{fitted[name][t]:.6g}" for name in sorted(fits)]
        lines.append(",".join(row))
    return payload, "\n".join(lines) + "\n", fits


@dataclass
class ProjectResult:
    name: str
    summary: ProjectSummary | None = None
    eligibility: dict | None = None
    error: str | None = None
    out_dir: Path | None = None


def run_project(source: ProjectSource, config: RunConfig) -> ProjectResult:
    result = ProjectResult(name=source.name)
    try:
        project_dir = config.out_dir / source.name
        project_dir.mkdir(parents=True, exist_ok=True)
        result.out_dir = project_dir

        if source.repo is not None:
            lines: Iterable[str] = cached_repo_lines(source.repo, config.include_merges)
            origin = str(source.repo)
        else:
            lines = Path(source.log).open(encoding="utf-8")
            origin = str(source.log)
        records, report = parse_log_stream(lines, strict=config.strict, source=origin)
        if not config.include_merges:
            records = (r for r in records if not r.is_merge)

        records_path = project_dir / "records.jsonl"
        try:
            with atomic_writer(records_path) as sink:
                series = build_monthly_series(_tee_records(records, sink), config.identity)
        finally:
            if hasattr(lines, "close"):
                lines.close()
        write_json_atomic(project_dir / "ingest_report.json", report.to_dict())
        write_json_atomic(project_dir / "series.json", series_to_dict(series))

        metrics_report = compute_metrics(series, config.metrics_window)
        write_json_atomic(project_dir / "metrics.json", metrics_report.to_dict())

        fit_payload, sidecar, fits = fit_report(
            series, config.smoothing_window, config.model, config.biphase
        )
        write_json_atomic(project_dir / "fit.json", fit_payload)
        write_text_atomic(project_dir / "fit.csv", sidecar)

        merge_policy = "included" if config.include_merges else "excluded"
        summary = summarize(series, metrics_report, fits, project=source.name, merge_policy=merge_policy)
        eligibility = check_eligibility(summary, config.thresholds)
        summary_payload = summary.to_dict()
        summary_payload["eligibility"] = eligibility.to_dict()
        write_json_atomic(project_dir / "summary.json", summary_payload)

        result.summary = summary
        result.eligibility = eligibility.to_dict()
    except ForgepulseError as exc:
        result.error = str(exc)
    except OSError as exc:
        result.error = f"i/o error: {exc}"
    return result


def summary_csv(rows: list[ProjectSummary]) -> str:
    header = (
        "project,total_contributors,total_orgs,mean_monthly_commits,"
        "active_p5,active_p95,commits_p5,commits_p95,orgs_p5,orgs_p95,"
        "spearman,diversity"
    )
    lines = [header]
    for row in rows:
        cells = [
            row.project,
            str(row.total_contributors),
            str(row.total_orgs),
            f"{row.mean_monthly_commits:.6g}",
            f"{row.active_contrib_range[0]:.6g}",
            f"{row.active_contrib_range[1]:.6g}",
            f"{row.monthly_commit_range[0]:.6g}",
            f"{row.monthly_commit_range[1]:.6g}",
            f"{row.active_org_range[0]:.6g}",
            f"{row.active_org_range[1]:.6g}",
            "" if row.spearman is None else f"{row.spearman:.6g}",
            "" if row.diversity is None else f"{row.diversity:.6g}",
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def summary_text(rows: list[ProjectSummary]) -> str:
    """Aligned text rendering of the combined summary table."""
    columns = ["Project", "Contributors", "Active/month", "Commits/month", "Orgs/month", "Spearman", "Diversity"]

    def cell_range(pair: tuple[float, float]) -> str:
        return f"{pair[0]:g} - {pair[1]:g}"

    table = [columns]
    for row in rows:
        table.append(
            [
                row.project,
                str(row.total_contributors),
                cell_range(row.active_contrib_range),
                cell_range(row.monthly_commit_range),
                cell_range(row.active_org_range),
                "n/a" if row.spearman is None else f"{row.spearman:.2f}",
                "n/a" if row.diversity is None else f"{row.diversity:.2f}",
            ]
        )
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    rendered = []
    for line_no, line in enumerate(table):
        rendered.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
        if line_no == 0:
            rendered.append("  ".join("-" * widths[i] for i in range(len(columns))))
    return "\n".join(rendered) + "\n"


@dataclass
class RunOutcome:
    results: list[ProjectResult]
    exit_code: int


def run_pipeline(config: RunConfig) -> RunOutcome:
    """Process every configured project; write the combined summary table.

    Exit code 0 means every project processed (eligibility failures are only
    warnings); any per-project error makes it 1.
    """
    config.out_dir.mkdir(parents=True, exist_ok=True)
    if config.workers == 1 or len(config.projects) == 1:
        results = [run_project(source, config) for source in config.projects]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda s: run_project(s, config), config.projects))

    rows = sorted(
        (r.summary for r in results if r.summary is not None), key=lambda s: s.project
    )
    write_text_atomic(config.out_dir / "summary.csv", summary_csv(rows))
    write_text_atomic(config.out_dir / "summary.txt", summary_text(rows))
    report = {
        "projects": {
            r.name: {"status": "ok" if r.error is None else "error", "error": r.error}
            for r in results
        }
    }
    write_json_atomic(config.out_dir / "run_report.json", report)
    exit_code = 0 if all(r.error is None for r in results) else 1
    return RunOutcome(results=results, exit_code=exit_code)
