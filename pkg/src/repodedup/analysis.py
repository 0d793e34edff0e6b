"""Downstream studies over finished dedup mappings.

Covers the three published use cases: cleaning an external project list
with the mapping plus noise file, comparing two independently built
mappings, and the commit-count percentile table that motivated keeping
the graph unweighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class ExternalDedupResult:
    kept: list[str]
    remapped: list[tuple[str, str]]
    dropped_as_noise: list[str]
    duplicates: int  # inputs that collapsed onto an already-kept project


def dedup_external_list(
    projects: Iterable[str],
    mapping: Mapping[str, str],
    noise: set[str],
) -> ExternalDedupResult:
    """Apply the usage contract of the two deliverable files to a list.

    Each name is remapped if it is a map source, dropped if it is noise,
    and kept as-is otherwise.  Duplicate survivors collapse to one, in
    first-seen order.
    """
    kept: list[str] = []
    seen: set[str] = set()
    remapped: list[tuple[str, str]] = []
    dropped: list[str] = []
    surviving_inputs = 0
    for name in projects:
        if name in mapping:
            target = mapping[name]
            remapped.append((name, target))
        elif name in noise:
            dropped.append(name)
            continue
        else:
            target = name
        surviving_inputs += 1
        if target not in seen:
            seen.add(target)
            kept.append(target)
    return ExternalDedupResult(kept, remapped, dropped, surviving_inputs - len(kept))


@dataclass(frozen=True)
class ComparisonReport:
    """Summary statistics of one mapping plus overlaps with the other.

    Cluster sizes are derived from the map alone: a target with k sources
    heads a cluster of size k + 1 (the target itself).  The standard
    deviation is the population form.
    """

    repositories: int
    independent_projects: int
    largest_cluster: int
    avg_cluster_size: float
    cluster_size_stddev: float
    external_duplicates: int
    source_overlap: int
    leader_overlap: int

    def as_dict(self) -> dict[str, float]:
        return {
            "repositories": self.repositories,
            "independent_projects": self.independent_projects,
            "largest_cluster": self.largest_cluster,
            "avg_cluster_size": self.avg_cluster_size,
            "cluster_size_stddev": self.cluster_size_stddev,
            "external_duplicates": self.external_duplicates,
            "source_overlap": self.source_overlap,
            "leader_overlap": self.leader_overlap,
        }


def _cluster_stats(mapping: Mapping[str, str]) -> tuple[int, float, float]:
    sizes: dict[str, int] = {}
    for target in mapping.values():
        sizes[target] = sizes.get(target, 0) + 1
    if not sizes:
        return 0, 0.0, 0.0
    cluster_sizes = [k + 1 for k in sizes.values()]
    largest = max(cluster_sizes)
    mean = sum(cluster_sizes) / len(cluster_sizes)
    variance = sum((s - mean) ** 2 for s in cluster_sizes) / len(cluster_sizes)
    return largest, mean, math.sqrt(variance)


def compare_datasets(
    map_a: Mapping[str, str],
    map_b: Mapping[str, str],
    external: Iterable[str] | None = None,
) -> tuple[ComparisonReport, ComparisonReport]:
    """Per-map statistics plus pairwise source and leader overlaps.

    ``external`` is an optional project list; its members found among a
    map's sources are that map's external-duplicate count (0 without it).
    """
    sources_a, sources_b = set(map_a), set(map_b)
    leaders_a, leaders_b = set(map_a.values()), set(map_b.values())
    source_overlap = len(sources_a & sources_b)
    leader_overlap = len(leaders_a & leaders_b)
    external_names = set(external) if external is not None else set()

    reports = []
    for mapping, sources in ((map_a, sources_a), (map_b, sources_b)):
        largest, mean, stddev = _cluster_stats(mapping)
        reports.append(
            ComparisonReport(
                repositories=len(mapping),
                independent_projects=len(set(mapping.values())),
                largest_cluster=largest,
                avg_cluster_size=mean,
                cluster_size_stddev=stddev,
                external_duplicates=len(external_names & sources),
                source_overlap=source_overlap,
                leader_overlap=leader_overlap,
            )
        )
    return reports[0], reports[1]


REPORT_ROWS = (
    ("repositories", "Number of repositories"),
    ("independent_projects", "Number of independent projects"),
    ("largest_cluster", "Size of largest cluster"),
    ("avg_cluster_size", "Average cluster size"),
    ("cluster_size_stddev", "Cluster size standard deviation"),
    ("external_duplicates", "External-list duplicates"),
    ("source_overlap", "Source overlap"),
    ("leader_overlap", "Leader overlap"),
)


def format_comparison(
    report_a: ComparisonReport,
    report_b: ComparisonReport,
    label_a: str = "A",
    label_b: str = "B",
) -> str:
    """Aligned two-column text table."""
    dict_a, dict_b = report_a.as_dict(), report_b.as_dict()
    width = max(len(label) for _, label in REPORT_ROWS)

    def cell(value: float) -> str:
        return f"{value:.2f}" if isinstance(value, float) else str(value)

    col_a = max(len(label_a), *(len(cell(dict_a[k])) for k, _ in REPORT_ROWS))
    col_b = max(len(label_b), *(len(cell(dict_b[k])) for k, _ in REPORT_ROWS))
    lines = [f"{'Metric'.ljust(width)}  {label_a.rjust(col_a)}  {label_b.rjust(col_b)}"]
    for key, label in REPORT_ROWS:
        lines.append(
            f"{label.ljust(width)}  {cell(dict_a[key]).rjust(col_a)}  {cell(dict_b[key]).rjust(col_b)}"
        )
    return "\n".join(lines) + "\n"


def format_comparison_kv(
    report_a: ComparisonReport,
    report_b: ComparisonReport,
    label_a: str = "a",
    label_b: str = "b",
) -> str:
    """Machine-readable `side.key value` lines."""
    lines = []
    for label, report in ((label_a, report_a), (label_b, report_b)):
        for key, _ in REPORT_ROWS:
            value = report.as_dict()[key]
            rendered = f"{value:.6f}" if isinstance(value, float) else str(value)
            lines.append(f"{label}.{key} {rendered}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PercentileTable:
    rows: list[tuple[float, int]]  # (percentile, commit-count threshold)


def commit_percentiles(
    counts: Iterable[int],
    steps: Sequence[float],
) -> PercentileTable:
    """Nearest-rank percentiles of a commit-count distribution.

    The p-th percentile is the value at rank ceil(p/100 * N) of the sorted
    data (rank 1 for p = 0), so results are always actual data points and
    reproducible on integer counts.  An empty stream yields an empty table.
    """
    data = sorted(counts)
    if not data:
        return PercentileTable([])
    rows = []
    for p in steps:
        if not 0 <= p <= 100:
            raise ValueError(f"percentile {p} outside 0..100")
        rank = max(1, math.ceil(p / 100 * len(data)))
        rows.append((p, data[rank - 1]))
    return PercentileTable(rows)
