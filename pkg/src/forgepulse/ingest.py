"""Commit-log acquisition and parsing.

Canonical dump format, one commit per line, UTF-8, LF newlines:

    <hash> TAB <author-date RFC-3339> TAB <author-email> TAB <author-name> TAB <parent-count>

A parent count of 2 or more marks a merge commit.  Author names containing
tabs cannot be represented and such lines are rejected (bad field count).
Timestamps are converted to UTC at parse time so that calendar-month
bucketing downstream is timezone-independent.
"""

from __future__ import annotations

import json
import re
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .errors import LogParseError, RepoAcquisitionError

_HEX40 = re.compile(r"[0-9a-fA-F]{40}")

REASON_FIELD_COUNT = "bad field count"
REASON_HASH = "bad hash"
REASON_TIMESTAMP = "bad timestamp"
REASON_PARENT_COUNT = "bad parent count"
REASON_EMPTY_EMAIL = "empty email"

GIT_LOG_FORMAT = "%H%x09%aI%x09%ae%x09%an%x09%P"


@dataclass(frozen=True)
class CommitRecord:
    """One commit: identity fields plus the merge flag.

    ``authored_at`` is always timezone-aware UTC.  Hashes are assumed unique
    within one ingested log (git guarantees this); the parser checks syntax
    only, to keep single-pass streaming at O(1) memory.
    """

    hash: str
    author_email: str
    author_name: str
    authored_at: datetime
    is_merge: bool


@dataclass
class IngestReport:
    source: str = "<stream>"
    records_parsed: int = 0
    records_skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def tally_skip(self, reason: str) -> None:
        self.records_skipped += 1
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + 1

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "records_parsed": self.records_parsed,
            "records_skipped": self.records_skipped,
            "skip_reasons": dict(self.skip_reasons),
        }


def _parse_timestamp(text: str) -> datetime | None:
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        return None
    if stamp.tzinfo is None:
        return None
    return stamp.astimezone(timezone.utc)


def _parse_line(line: str) -> tuple[CommitRecord | None, str | None]:
    parts = line.split("\t")
    if len(parts) != 5:
        return None, REASON_FIELD_COUNT
    sha, stamp_text, email, name, parent_text = parts
    if not _HEX40.fullmatch(sha):
        return None, REASON_HASH
    stamp = _parse_timestamp(stamp_text)
    if stamp is None:
        return None, REASON_TIMESTAMP
    try:
        parent_count = int(parent_text)
    except ValueError:
        return None, REASON_PARENT_COUNT
    if parent_count < 0:
        return None, REASON_PARENT_COUNT
    if not email.strip():
        return None, REASON_EMPTY_EMAIL
    return (
        CommitRecord(
            hash=sha,
            author_email=email,
            author_name=name,
            authored_at=stamp,
            is_merge=parent_count >= 2,
        ),
        None,
    )


def parse_log_stream(
    lines: Iterable[str],
    strict: bool = False,
    source: str = "<stream>",
) -> tuple[Iterator[CommitRecord], IngestReport]:
    """Parse canonical-format lines into records, single pass, input order.

    Returns a lazy record iterator plus a report that is complete once the
    iterator is exhausted.  Fully blank lines are ignored (they are not
    records); every other line is either parsed or tallied as skipped, so
    records_parsed + records_skipped equals the non-blank line count.

    strict=True raises LogParseError (with line number and reason) at the
    first malformed line; strict=False skips and tallies it instead.  Lines
    with an empty author email are treated as malformed: they are counted
    under "empty email" and excluded from downstream analysis.
    """
    report = IngestReport(source=source)

    def _records() -> Iterator[CommitRecord]:
        for line_no, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            record, reason = _parse_line(line)
            if record is None:
                if strict:
                    raise LogParseError(line_no, reason)
                report.tally_skip(reason)
                continue
            report.records_parsed += 1
            yield record

    return _records(), report


def format_record(record: CommitRecord) -> str:
    """Serialize back to the canonical line format.

    The parent count is canonicalized: 2 for merges, 1 otherwise.  Re-parsing
    the result yields a record equal to the input.
    """
    parent_count = 2 if record.is_merge else 1
    return "\t".join(
        (
            record.hash,
            record.authored_at.isoformat(),
            record.author_email,
            record.author_name,
            str(parent_count),
        )
    )


def record_to_dict(record: CommitRecord) -> dict:
    return {
        "hash": record.hash,
        "author_email": record.author_email,
        "author_name": record.author_name,
        "authored_at": record.authored_at.isoformat(),
        "is_merge": record.is_merge,
    }


def record_from_dict(data: dict) -> CommitRecord:
    stamp = _parse_timestamp(data["authored_at"])
    if stamp is None:
        raise LogParseError(0, REASON_TIMESTAMP)
    return CommitRecord(
        hash=data["hash"],
        author_email=data["author_email"],
        author_name=data["author_name"],
        authored_at=stamp,
        is_merge=bool(data["is_merge"]),
    )


def read_records_jsonl(lines: Iterable[str]) -> Iterator[CommitRecord]:
    for raw in lines:
        line = raw.strip()
        if line:
            yield record_from_dict(json.loads(line))


def acquire_repo_log(repo_path: str | Path, include_merges: bool = False) -> Iterator[str]:
    """Stream the canonical dump for all commits reachable from any ref.

    Wraps ``git log --all``; the parent-hash list git emits is replaced by a
    parent count while streaming.  Raises RepoAcquisitionError with git's
    diagnostic text on any failure.
    """
    repo_path = Path(repo_path)
    if not repo_path.exists():
        raise RepoAcquisitionError(f"path does not exist: {repo_path}")
    cmd = ["git", "-C", str(repo_path), "log", "--all", f"--pretty=format:{GIT_LOG_FORMAT}"]
    if not include_merges:
        cmd.append("--no-merges")
    try:
        proc = subprocess.Popen(
            cmd,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            errors="replace",
        )
    except OSError as exc:
        raise RepoAcquisitionError(f"cannot invoke git: {exc}") from exc
    assert proc.stdout is not None and proc.stderr is not None
    try:
        for raw in proc.stdout:
            line = raw.rstrip("\n")
            if not line:
                continue
            head, _, parents = line.rpartition("\t")
            count = 0 if not parents.strip() else len(parents.split(" "))
            yield f"{head}\t{count}\n"
        stderr_text = proc.stderr.read()
    finally:
        proc.stdout.close()
        proc.stderr.close()
        proc.wait()
    if proc.returncode != 0:
        raise RepoAcquisitionError(stderr_text.strip() or f"git exited with {proc.returncode}")
