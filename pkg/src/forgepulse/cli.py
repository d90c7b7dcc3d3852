"""forgepulse command line: ingest, series, metrics, fit, run, summary."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, ForgepulseError
from .identity import IdentityConfig, load_identity_config
from .ingest import parse_log_stream, read_records_jsonl
from .jsonio import atomic_writer, dumps_stable, write_json_atomic, write_text_atomic
from .pipeline import (
    cached_repo_lines,
    compute_metrics,
    fit_report,
    load_run_config,
    run_pipeline,
    summary_csv,
    summary_text,
    ProjectSummary,
)
from .series import build_monthly_series, load_series, series_to_dict
from .ingest import record_to_dict


def _cmd_ingest(args: argparse.Namespace) -> int:
    if args.repo:
        lines = cached_repo_lines(Path(args.repo), include_merges=args.include_merges)
        source = args.repo
    else:
        lines = Path(args.log).open(encoding="utf-8")
        source = args.log
    records, report = parse_log_stream(lines, strict=args.strict, source=source)
    if not args.include_merges:
        records = (r for r in records if not r.is_merge)
    written = 0
    try:
        if args.out == "-":
            for record in records:
                sys.stdout.write(dumps_stable(record_to_dict(record), indent=None) + "\n")
                written += 1
        else:
            with atomic_writer(args.out) as sink:
                for record in records:
                    sink.write(dumps_stable(record_to_dict(record), indent=None) + "\n")
                    written += 1
    finally:
        if hasattr(lines, "close"):
            lines.close()
    payload = report.to_dict()
    payload["records_written"] = written
    payload["merge_policy"] = "included" if args.include_merges else "excluded"
    sys.stderr.write(dumps_stable(payload) + "\n")
    return 0


def _identity_from_args(args: argparse.Namespace) -> IdentityConfig:
    if args.identity_config:
        return load_identity_config(args.identity_config, group_providers=args.group_providers)
    if args.group_providers:
        return IdentityConfig(group_providers=True)
    return IdentityConfig()


def _cmd_series(args: argparse.Namespace) -> int:
    identity = _identity_from_args(args)
    handle = sys.stdin if args.infile == "-" else Path(args.infile).open(encoding="utf-8")
    try:
        series = build_monthly_series(read_records_jsonl(handle), identity)
    finally:
        if handle is not sys.stdin:
            handle.close()
    write_json_atomic(args.out, series_to_dict(series))
    return 0


def _parse_window(text: str) -> int | str:
    if text == "all":
        return "all"
    if text.startswith("last"):
        return int(text[4:])
    raise ConfigError(f"bad window {text!r}: use 'all' or 'lastN'")


def _cmd_metrics(args: argparse.Namespace) -> int:
    series = load_series(args.series)
    report = compute_metrics(series, _parse_window(args.window))
    write_json_atomic(args.out, report.to_dict())
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    series = load_series(args.series)
    payload, sidecar, _ = fit_report(series, args.window, args.model, args.biphase)
    write_json_atomic(args.out, payload)
    sidecar_path = Path(args.out).with_suffix(".csv")
    write_text_atomic(sidecar_path, sidecar)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    outcome = run_pipeline(config)
    for result in outcome.results:
        if result.error is not None:
            sys.stderr.write(f"error: {result.name}: {result.error}\n")
        elif result.eligibility and not result.eligibility.get("eligible", True):
            sys.stderr.write(f"warning: {result.name}: below eligibility thresholds\n")
    return outcome.exit_code


def _cmd_summary(args: argparse.Namespace) -> int:
    rows = []
    for path in args.inputs:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rows.append(
            ProjectSummary(
                project=data["project"],
                total_contributors=data["total_contributors"],
                total_orgs=data["total_orgs"],
                mean_monthly_commits=data["mean_monthly_commits"],
                active_contrib_range=tuple(data["active_contrib_range"]),
                monthly_commit_range=tuple(data["monthly_commit_range"]),
                active_org_range=tuple(data["active_org_range"]),
                spearman=data["spearman"],
                spearman_reason=data.get("spearman_reason"),
                diversity=data["diversity"],
                diversity_reason=data.get("diversity_reason"),
                merge_policy=data.get("merge_policy", "excluded"),
                notes=tuple(data.get("notes", ())),
            )
        )
    rows.sort(key=lambda r: r.project)
    if args.out_csv:
        write_text_atomic(args.out_csv, summary_csv(rows))
    if args.out_text:
        write_text_atomic(args.out_text, summary_text(rows))
    if not args.out_csv and not args.out_text:
        sys.stdout.write(summary_text(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgepulse",
        description="Mine git commit histories for community productivity, diversity, and growth analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="extract and validate commit records")
    source = p_ingest.add_mutually_exclusive_group(required=True)
    source.add_argument("--repo", help="path to a git repository")
    source.add_argument("--log", help="path to a canonical-format log file")
    p_ingest.add_argument("--include-merges", action="store_true")
    p_ingest.add_argument("--strict", action="store_true", help="abort on the first malformed line")
    p_ingest.add_argument("--out", required=True, help="output JSONL path, or - for stdout")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_series = sub.add_parser("series", help="aggregate records into a monthly series")
    p_series.add_argument("--in", dest="infile", required=True, help="records JSONL path, or - for stdin")
    p_series.add_argument("--identity-config", help="identity config JSON")
    p_series.add_argument("--group-providers", action="store_true",
                          help="collapse provider-domain individuals into one unit")
    p_series.add_argument("--out", required=True)
    p_series.set_defaults(func=_cmd_series)

    p_metrics = sub.add_parser("metrics", help="productivity and diversity statistics")
    p_metrics.add_argument("--series", required=True)
    p_metrics.add_argument("--window", default="all", help="'all' or 'lastN' months (diversity window)")
    p_metrics.add_argument("--out", required=True)
    p_metrics.set_defaults(func=_cmd_metrics)

    p_fit = sub.add_parser("fit", help="fit growth curves to the active-contributor series")
    p_fit.add_argument("--series", required=True)
    p_fit.add_argument("--model", choices=["gompertz", "logistic", "both"], default="both")
    p_fit.add_argument("--biphase", action="store_true", help="also search for bi-phase growth")
    p_fit.add_argument("--window", type=int, default=3, help="smoothing window (odd)")
    p_fit.add_argument("--out", required=True, help="FIT.json path; a .csv sidecar lands next to it")
    p_fit.set_defaults(func=_cmd_fit)

    p_run = sub.add_parser("run", help="full pipeline over all configured projects")
    p_run.add_argument("--config", required=True, help="run config JSON")
    p_run.set_defaults(func=_cmd_run)

    p_summary = sub.add_parser("summary", help="merge per-project summary rows into one table")
    p_summary.add_argument("inputs", nargs="+", help="summary.json files")
    p_summary.add_argument("--out-csv")
    p_summary.add_argument("--out-text")
    p_summary.set_defaults(func=_cmd_summary)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except ForgepulseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
