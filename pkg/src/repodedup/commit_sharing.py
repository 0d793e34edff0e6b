"""Shared-commit edge extraction over out-of-core sorted memberships.

The membership table is far too large to group in memory, so it is first
external-merge-sorted by commit id into a compact binary file.  A single
sequential pass then walks each commit group, elects the best-ranked member
as the group's attractor, and emits one (attractor, other) pair per
remaining member.
"""

from __future__ import annotations

import heapq
import logging
import os
import shutil
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .ingest import RejectLog, read_commit_memberships
from .scoring import ScoreLookup

log = logging.getLogger(__name__)

# Little-endian (commit_id, project_id) pairs; the on-disk run/output format.
RECORD = struct.Struct("<QQ")

MIN_MEMORY_BUDGET = 64 * 1024 * 1024

# Rough resident cost of one buffered record: a packed 128-bit key object
# plus its list slot.  Used to translate the byte budget into a chunk size.
BYTES_PER_BUFFERED_RECORD = 96

DEFAULT_GROUP_CAP = 200_000

_SHIFT = 64
_MASK = (1 << 64) - 1


class UnsortedInputError(Exception):
    """The membership stream was not sorted by commit id."""


class InsufficientDiskError(Exception):
    def __init__(self, required: int, free: int):
        super().__init__(
            f"external sort needs roughly {required} bytes of scratch space "
            f"but only {free} are free"
        )
        self.required = required
        self.free = free


@dataclass(frozen=True)
class SharedEdge:
    """One attractor pair with the number of commits witnessing it."""

    p1: int
    p2: int
    shared_count: int


def sort_memberships(
    path_in: Path | str,
    path_out: Path | str,
    memory_budget: int = 4 * MIN_MEMORY_BUDGET,
    fmt: str = "csv",
    rejects: RejectLog | None = None,
) -> int:
    """Sort a membership dump by (commit_id, project_id) into binary form.

    Exact duplicate pairs are collapsed.  Peak memory stays within
    ``memory_budget`` (plus interpreter overhead) by spilling sorted runs to
    temporary files next to the output and merging them in one streaming
    pass.  Returns the number of records written.
    """
    if memory_budget < MIN_MEMORY_BUDGET:
        raise ValueError(f"memory_budget below the {MIN_MEMORY_BUDGET} byte floor")
    out_path = Path(path_out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _check_disk(path_in, out_path.parent)

    chunk_records = max(1024, memory_budget // BYTES_PER_BUFFERED_RECORD)
    run_files: list[object] = []
    chunk: list[int] = []

    def spill() -> None:
        chunk.sort()
        run = tempfile.TemporaryFile(dir=out_path.parent)
        prev = None
        buf = bytearray()
        for key in chunk:
            if key == prev:
                continue
            prev = key
            buf += RECORD.pack(key >> _SHIFT, key & _MASK)
            if len(buf) >= 1 << 20:
                run.write(buf)
                buf.clear()
        run.write(buf)
        run.seek(0)
        run_files.append(run)
        chunk.clear()

    try:
        for rec in read_commit_memberships(path_in, fmt=fmt, rejects=rejects):
            chunk.append((rec.commit_id << _SHIFT) | rec.project_id)
            if len(chunk) >= chunk_records:
                spill()
        if chunk:
            spill()

        written = 0
        with open(out_path, "wb") as out:
            prev_pair = None
            buf = bytearray()
            for pair in heapq.merge(*(_iter_packed(run) for run in run_files)):
                if pair == prev_pair:
                    continue
                prev_pair = pair
                buf += RECORD.pack(*pair)
                written += 1
                if len(buf) >= 1 << 20:
                    out.write(buf)
                    buf.clear()
            out.write(buf)
        return written
    except OSError as err:
        if err.errno == 28:  # ENOSPC
            free = shutil.disk_usage(out_path.parent).free
            raise InsufficientDiskError(2 * os.path.getsize(path_in), free) from err
        raise
    finally:
        for run in run_files:
            run.close()


def _check_disk(path_in: Path | str, scratch_dir: Path) -> None:
    # Runs plus output are at worst a couple of times the input's size.
    required = 2 * os.path.getsize(path_in)
    free = shutil.disk_usage(scratch_dir).free
    if free < required:
        raise InsufficientDiskError(required, free)


def _iter_packed(handle) -> Iterator[tuple[int, int]]:
    while True:
        block = handle.read(1 << 16)
        if not block:
            return
        yield from RECORD.iter_unpack(block)


def iter_sorted_memberships(path: Path | str) -> Iterator[tuple[int, int]]:
    """Stream (commit_id, project_id) pairs from a sorted binary file."""
    with open(path, "rb") as src:
        yield from _iter_packed(src)


def write_memberships_tsv(path_bin: Path | str, path_tsv: Path | str) -> None:
    """Debug view of the binary sorted file."""
    with open(path_tsv, "w", encoding="utf-8", newline="\n") as out:
        for commit_id, project_id in iter_sorted_memberships(path_bin):
            out.write(f"{commit_id}\t{project_id}\n")


def _commit_groups(
    memberships: Iterable[tuple[int, int]],
) -> Iterator[tuple[int, list[int]]]:
    """Collect consecutive rows of one commit; only one group is resident."""
    current: int | None = None
    members: list[int] = []
    for commit_id, project_id in memberships:
        if current is None:
            current = commit_id
        elif commit_id < current:
            raise UnsortedInputError(
                f"commit id {commit_id} follows {current}; re-sort the input"
            )
        elif commit_id != current:
            yield current, members
            current = commit_id
            members = []
        members.append(project_id)
    if current is not None:
        yield current, members


def emit_shared_edges(
    memberships: Iterable[tuple[int, int]],
    scores: ScoreLookup,
    min_shared: int = 1,
    group_cap: int = DEFAULT_GROUP_CAP,
) -> list[SharedEdge]:
    """Elect an attractor per commit and aggregate the resulting pairs.

    ``memberships`` must be sorted by commit id (project order within a
    commit does not matter).  For every commit shared by k > 1 projects the
    best-ranked member p1 attracts the other k-1, and each distinct
    (p1, p2) pair is returned once with the number of witnessing commits.
    Pairs below ``min_shared`` are suppressed.  Output is sorted by
    (p1, p2) for reproducibility.
    """
    if min_shared < 1:
        raise ValueError("min_shared must be at least 1")
    pair_counts: dict[tuple[int, int], int] = {}
    for commit_id, raw_members in _commit_groups(memberships):
        members = set(raw_members)
        if len(members) < 2:
            continue
        if len(members) > group_cap:
            log.warning(
                "commit %d is shared by %d projects (cap %d); processing anyway",
                commit_id,
                len(members),
                group_cap,
            )
        attractor = min(members, key=scores.rank_key)
        for other in members:
            if other != attractor:
                key = (attractor, other)
                pair_counts[key] = pair_counts.get(key, 0) + 1
    return [
        SharedEdge(p1, p2, count)
        for (p1, p2), count in sorted(pair_counts.items())
        if count >= min_shared
    ]


def write_shared_edges_tsv(edges: Iterable[SharedEdge], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for e in edges:
            out.write(f"{e.p1}\t{e.p2}\t{e.shared_count}\n")


def read_shared_edges_tsv(path: Path | str) -> Iterator[SharedEdge]:
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            p1, p2, count = line.rstrip("\n").split("\t")
            yield SharedEdge(int(p1), int(p2), int(count))
