"""Streaming readers for relational forge dumps.

All readers walk their file once, yield typed records, and never hold more
than one row in memory.  Malformed rows are counted in a reject log and
skipped; only an unreadable file aborts the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping

NULL_TOKEN = r"\N"

DUMP_FORMATS = ("csv", "tsv")

EVENT_KINDS = ("stars", "forks", "commits", "issues", "pull_requests", "latest_commit_time")

# Kinds whose input file carries one row per event, counted per project.
COUNTED_KINDS = ("stars", "forks", "commits", "issues", "pull_requests")


@dataclass(frozen=True)
class ProjectRecord:
    """One forge repository as found in the projects dump."""

    project_id: int
    name: str
    forked_from: int | None = None
    deleted: bool = False

    @property
    def owner(self) -> str:
        return self.name.split("/", 1)[0]


@dataclass(frozen=True)
class CommitMembershipRecord:
    commit_id: int
    project_id: int


@dataclass(frozen=True)
class EventCountRecord:
    project_id: int
    kind: str
    value: int


class RejectLog:
    """Collects one `<file>:<line>\\t<reason>` entry per rejected row."""

    def __init__(self) -> None:
        self.entries: list[tuple[str, int, str]] = []

    @property
    def count(self) -> int:
        return len(self.entries)

    def record(self, source: str, line_no: int, reason: str) -> None:
        self.entries.append((source, line_no, reason))

    def write(self, path: Path | str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            for source, line_no, reason in self.entries:
                out.write(f"{source}:{line_no}\t{reason}\n")


def _separator(fmt: str) -> str:
    if fmt not in DUMP_FORMATS:
        raise ValueError(f"unknown dump format {fmt!r}; expected one of {DUMP_FORMATS}")
    return "," if fmt == "csv" else "\t"


def _parse_id(token: str) -> int:
    value = int(token)
    if value <= 0:
        raise ValueError("id must be positive")
    return value


def read_projects(
    path: Path | str,
    fmt: str = "csv",
    rejects: RejectLog | None = None,
) -> Iterator[ProjectRecord]:
    """Yield project records in file order.

    Rows are `project_id,owner/name,forked_from[,deleted]` with ``\\N`` for
    null.  Rows with a bad id, a malformed name, or a self-referential fork
    pointer are rejected, not fatal.
    """
    sep = _separator(fmt)
    source = str(path)
    with open(path, "r", encoding="utf-8") as src:
        for line_no, line in enumerate(src, start=1):
            row = line.rstrip("\n").rstrip("\r")
            if not row:
                continue
            parts = row.split(sep)
            if len(parts) not in (3, 4):
                _reject(rejects, source, line_no, f"expected 3 or 4 fields, got {len(parts)}")
                continue
            try:
                pid = _parse_id(parts[0])
            except ValueError:
                _reject(rejects, source, line_no, "non-numeric or non-positive project id")
                continue
            name = parts[1]
            segments = name.split("/")
            if len(segments) != 2 or not segments[0] or not segments[1]:
                _reject(rejects, source, line_no, "name is not of the form login/project")
                continue
            forked_from: int | None = None
            if parts[2] != NULL_TOKEN and parts[2] != "":
                try:
                    forked_from = _parse_id(parts[2])
                except ValueError:
                    _reject(rejects, source, line_no, "non-numeric forked_from")
                    continue
                if forked_from == pid:
                    _reject(rejects, source, line_no, "project forked from itself")
                    continue
            deleted = len(parts) == 4 and parts[3] not in ("0", "", NULL_TOKEN)
            yield ProjectRecord(pid, name, forked_from, deleted)


def read_commit_memberships(
    path: Path | str,
    fmt: str = "csv",
    rejects: RejectLog | None = None,
) -> Iterator[CommitMembershipRecord]:
    """Yield (commit, project) memberships; rows are `project_id,commit_id`.

    Order is whatever the dump has and duplicates pass through; both are
    resolved by the external sort stage.
    """
    sep = _separator(fmt)
    source = str(path)
    with open(path, "r", encoding="utf-8") as src:
        for line_no, line in enumerate(src, start=1):
            row = line.rstrip("\n").rstrip("\r")
            if not row:
                continue
            parts = row.split(sep)
            if len(parts) < 2:
                _reject(rejects, source, line_no, "expected project_id and commit_id")
                continue
            try:
                pid = _parse_id(parts[0])
                cid = _parse_id(parts[1])
            except ValueError:
                _reject(rejects, source, line_no, "non-numeric id")
                continue
            yield CommitMembershipRecord(commit_id=cid, project_id=pid)


def _parse_timestamp(token: str) -> int:
    """Accept integer epoch seconds or an ISO-style `YYYY-MM-DD HH:MM:SS`."""
    try:
        return int(token)
    except ValueError:
        pass
    moment = datetime.fromisoformat(token)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return int(moment.timestamp())


def aggregate_event_counts(
    paths: Mapping[str, Path | str],
    fmt: str = "csv",
    rejects: RejectLog | None = None,
) -> Iterator[EventCountRecord]:
    """Count per-project events across the activity tables.

    ``paths`` maps a counted kind (stars, forks, commits, issues,
    pull_requests) to its dump file; each row's first column is the project
    id.  The commits file carries `project_id,timestamp` rows and also
    produces one latest_commit_time record per project (the max timestamp).
    Exactly one record per (project, kind) is yielded, ids ascending.
    """
    unknown = set(paths) - set(COUNTED_KINDS)
    if unknown:
        raise ValueError(f"unknown event kinds: {sorted(unknown)}")
    sep = _separator(fmt)
    for kind in COUNTED_KINDS:
        if kind not in paths:
            continue
        source = str(paths[kind])
        counts: dict[int, int] = {}
        latest: dict[int, int] = {}
        with open(paths[kind], "r", encoding="utf-8") as src:
            for line_no, line in enumerate(src, start=1):
                row = line.rstrip("\n").rstrip("\r")
                if not row:
                    continue
                parts = row.split(sep)
                try:
                    pid = _parse_id(parts[0])
                except ValueError:
                    _reject(rejects, source, line_no, "non-numeric project id")
                    continue
                if kind == "commits":
                    if len(parts) < 2:
                        _reject(rejects, source, line_no, "commit row missing timestamp")
                        continue
                    try:
                        ts = _parse_timestamp(parts[1])
                    except ValueError:
                        _reject(rejects, source, line_no, "unparseable commit timestamp")
                        continue
                    if ts < 0:
                        _reject(rejects, source, line_no, "negative commit timestamp")
                        continue
                    prev = latest.get(pid)
                    if prev is None or ts > prev:
                        latest[pid] = ts
                counts[pid] = counts.get(pid, 0) + 1
        for pid in sorted(counts):
            yield EventCountRecord(pid, kind, counts[pid])
        for pid in sorted(latest):
            yield EventCountRecord(pid, "latest_commit_time", latest[pid])


def _reject(rejects: RejectLog | None, source: str, line_no: int, reason: str) -> None:
    if rejects is not None:
        rejects.record(source, line_no, reason)


def fork_edges(projects: Iterable[ProjectRecord]) -> Iterator[tuple[int, int]]:
    """(child, parent) pairs from the fork ancestry column."""
    for rec in projects:
        if rec.forked_from is not None:
            yield (rec.project_id, rec.forked_from)
