"""Leader election per component and the two deliverable files.

`deduplicate_names` maps every duplicated project to its cluster's
definitive leader; `forks_clones_noise_names` is the superset of those
sources plus everything excluded as noise along the way.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .graph import ComponentAssignment
from .scoring import ScoreLookup

LEADER_STRATEGIES = ("mean", "stars", "forks")


class MissingNameError(KeyError):
    """A project id reached the deliverable stage without a name."""


@dataclass(frozen=True)
class ClusterSummary:
    component_id: int
    size: int
    leader: int
    leader_score: float


def elect_leaders(
    assign: ComponentAssignment,
    scores: ScoreLookup,
    strategy: str = "mean",
) -> list[ClusterSummary]:
    """One summary per component; the leader maximizes the strategy key.

    The key orders by the chosen metric descending with ascending project
    id as the tie-breaker, so election is deterministic.  ``leader_score``
    is the leader's value of the chosen metric.
    """
    if strategy not in LEADER_STRATEGIES:
        raise ValueError(f"unknown leader strategy {strategy!r}")
    summaries = []
    for comp_id, members in sorted(assign.members_by_component().items()):
        leader = min(members, key=lambda pid: scores.strategy_key(pid, strategy))
        # strategy_key negates the metric to sort descending; undo that.
        leader_score = -scores.strategy_key(leader, strategy)[0]
        summaries.append(ClusterSummary(comp_id, len(members), leader, leader_score))
    return summaries


def dedup_pairs(
    summaries: Iterable[ClusterSummary],
    assign: ComponentAssignment,
    names: Mapping[int, str],
) -> list[tuple[str, str]]:
    """(source name, leader name) for every non-leader in a size >= 2 component."""
    leader_of = {s.component_id: s.leader for s in summaries}
    pairs = []
    for comp_id, members in assign.members_by_component().items():
        if len(members) < 2:
            continue
        leader = leader_of[comp_id]
        leader_name = _name_of(names, leader)
        for member in members:
            if member != leader:
                pairs.append((_name_of(names, member), leader_name))
    pairs.sort()
    return pairs


def _name_of(names: Mapping[int, str], project_id: int) -> str:
    name = names.get(project_id)
    if name is None:
        raise MissingNameError(project_id)
    return name


def write_dedup_map(
    summaries: Iterable[ClusterSummary],
    assign: ComponentAssignment,
    names: Mapping[int, str],
    path: Path | str,
) -> int:
    """Write `source<TAB>target` lines sorted by source; returns line count."""
    pairs = dedup_pairs(summaries, assign, names)
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for source, target in pairs:
            out.write(f"{source}\t{target}\n")
    return len(pairs)


def write_noise(
    map_sources: Iterable[str],
    removed_by_denoise: Iterable[str],
    blacklisted: Iterable[str],
    path: Path | str,
) -> int:
    """Write the noise superset: map sources, denoise casualties, blacklist hits."""
    noise = set(map_sources) | set(removed_by_denoise) | set(blacklisted)
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for name in sorted(noise):
            out.write(f"{name}\n")
    return len(noise)


def read_dedup_map(path: Path | str, rejects=None) -> dict[str, str]:
    """Load a `source<TAB>target` file; malformed lines are counted, not fatal."""
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as src:
        for line_no, line in enumerate(src, start=1):
            row = line.rstrip("\n")
            if not row:
                continue
            parts = row.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                if rejects is not None:
                    rejects.record(str(path), line_no, "expected source<TAB>target")
                continue
            mapping[parts[0]] = parts[1]
    return mapping


def read_noise(path: Path | str) -> set[str]:
    with open(path, "r", encoding="utf-8") as src:
        return {line.rstrip("\n") for line in src if line.rstrip("\n")}


def write_cluster_summaries(summaries: Iterable[ClusterSummary], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for s in summaries:
            out.write(f"{s.component_id}\t{s.size}\t{s.leader}\t{s.leader_score:.9f}\n")


def read_cluster_summaries(path: Path | str) -> Iterator[ClusterSummary]:
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            comp, size, leader, score = line.rstrip("\n").split("\t")
            yield ClusterSummary(int(comp), int(size), int(leader), float(score))
