"""Per-project activity metrics and their zero-corrected geometric mean.

The mean is the ranking key used everywhere downstream: it elects the
attractor project for every shared commit and the leader of every cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Iterator, Mapping

from .ingest import EventCountRecord

METRIC_KINDS = ("recency", "stars", "forks", "commits", "issues", "pull_requests")

DEFAULT_DELTA = 0.001

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class MetricVector:
    """The six activity metrics of one project; missing metrics are 0."""

    recency: float = 0.0
    stars: float = 0.0
    forks: float = 0.0
    commits: float = 0.0
    issues: float = 0.0
    pull_requests: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.recency,
            self.stars,
            self.forks,
            self.commits,
            self.issues,
            self.pull_requests,
        )


@dataclass(frozen=True)
class ScoredProject:
    project_id: int
    mean_metric: float
    metrics: MetricVector


ZERO_METRICS = MetricVector()


def geometric_mean_offset(x: Iterable[float], delta: float = DEFAULT_DELTA) -> float:
    """Geometric mean with a small positive offset correcting for zeros.

    Computes exp(mean(log(x_i + delta))) - delta in double precision.
    An all-zero vector maps back to 0 and a constant vector maps to its
    constant, so the offset never distorts the scale of the result.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    values = list(x)
    if not values:
        raise ValueError("cannot average an empty vector")
    for v in values:
        if v < 0:
            raise ValueError(f"metric components must be non-negative, got {v}")
    if all(v == 0 for v in values):
        # exp(log(delta)) - delta is 0 only up to round-off; return it
        # exactly so a zero score means zero activity and nothing else.
        return 0.0
    total = sum(math.log(v + delta) for v in values)
    result = math.exp(total / len(values)) - delta
    return result if result > 0.0 else 0.0


def epoch_seconds(epoch: date) -> float:
    """Seconds since the Unix epoch of midnight UTC on the given day."""
    moment = datetime(epoch.year, epoch.month, epoch.day, tzinfo=timezone.utc)
    return moment.timestamp()


class ScoreWarnings:
    """Mutable counters surfaced in run metadata."""

    def __init__(self) -> None:
        self.pre_epoch_commits = 0


def score_all(
    events: Iterable[EventCountRecord],
    epoch: date,
    delta: float = DEFAULT_DELTA,
    extra_ids: Iterable[int] = (),
    warnings: ScoreWarnings | None = None,
) -> Iterator[ScoredProject]:
    """Fold aggregated event counts into one ScoredProject per project.

    Projects named in ``extra_ids`` but absent from the event stream are
    scored too (their vector is all zeros).  A latest-commit time before
    the epoch clamps recency to 0 and bumps the warning counter.
    Results are yielded in ascending project-id order.
    """
    epoch_s = epoch_seconds(epoch)
    per_project: dict[int, dict[str, float]] = {}
    for rec in events:
        slot = per_project.setdefault(rec.project_id, {})
        slot[rec.kind] = float(rec.value)
    for pid in extra_ids:
        per_project.setdefault(pid, {})

    for pid in sorted(per_project):
        raw = per_project[pid]
        if "latest_commit_time" in raw:
            recency = (raw["latest_commit_time"] - epoch_s) / SECONDS_PER_DAY
            if recency < 0:
                recency = 0.0
                if warnings is not None:
                    warnings.pre_epoch_commits += 1
        else:
            recency = 0.0
        metrics = MetricVector(
            recency=recency,
            stars=raw.get("stars", 0.0),
            forks=raw.get("forks", 0.0),
            commits=raw.get("commits", 0.0),
            issues=raw.get("issues", 0.0),
            pull_requests=raw.get("pull_requests", 0.0),
        )
        yield ScoredProject(pid, geometric_mean_offset(metrics.as_tuple(), delta), metrics)


def rank_key(p: ScoredProject) -> tuple[float, int]:
    """Sort key ordering by mean metric descending, then project id ascending.

    ``min()`` over this key picks the best-ranked project; distinct ids
    never compare equal, so the order is total.
    """
    return (-p.mean_metric, p.project_id)


def strategy_key(p: ScoredProject, strategy: str) -> tuple[float, int]:
    """Leader-election key: chosen metric descending, then id ascending."""
    if strategy == "mean":
        return (-p.mean_metric, p.project_id)
    if strategy == "stars":
        return (-p.metrics.stars, p.project_id)
    if strategy == "forks":
        return (-p.metrics.forks, p.project_id)
    raise ValueError(f"unknown leader strategy: {strategy!r}")


def zero_scored(project_id: int) -> ScoredProject:
    """Placeholder score for a project with no recorded activity."""
    return ScoredProject(project_id, 0.0, ZERO_METRICS)


class ScoreLookup:
    """Score table that treats unknown projects as having zero activity."""

    def __init__(self, scores: Mapping[int, ScoredProject] | Iterable[ScoredProject]):
        if isinstance(scores, Mapping):
            self._table = dict(scores)
        else:
            self._table = {s.project_id: s for s in scores}

    def __getitem__(self, project_id: int) -> ScoredProject:
        got = self._table.get(project_id)
        return got if got is not None else zero_scored(project_id)

    def __len__(self) -> int:
        return len(self._table)

    def rank_key(self, project_id: int) -> tuple[float, int]:
        return rank_key(self[project_id])

    def strategy_key(self, project_id: int, strategy: str) -> tuple[float, int]:
        return strategy_key(self[project_id], strategy)


def write_scores_tsv(scores: Iterable[ScoredProject], path) -> None:
    """Side-output: one row per project, floats at fixed 9-decimal width."""
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for s in scores:
            m = s.metrics
            out.write(
                f"{s.project_id}\t{s.mean_metric:.9f}\t{m.recency:.9f}\t"
                f"{m.stars:.9f}\t{m.forks:.9f}\t{m.commits:.9f}\t"
                f"{m.issues:.9f}\t{m.pull_requests:.9f}\n"
            )


def read_scores_tsv(path) -> Iterator[ScoredProject]:
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            parts = line.rstrip("\n").split("\t")
            pid = int(parts[0])
            mean = float(parts[1])
            metrics = MetricVector(*(float(v) for v in parts[2:8]))
            yield ScoredProject(pid, mean, metrics)
