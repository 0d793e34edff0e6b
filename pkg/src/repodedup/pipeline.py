"""End-to-end orchestration: dumps in, deliverables out.

Each stage reads the previous stage's checkpoint files from the work
directory and writes its own atomically, so a run can resume from any
stage as long as the inputs recorded in the manifest are unchanged.
Given identical inputs and config, every file written is byte-identical
across runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

from . import commit_sharing, graph, ingest, outputs, scoring
from .config import KIND_TO_TABLE, PipelineConfig, validate

STAGES = (
    "ingest",
    "score",
    "sort",
    "shared",
    "graph",
    "denoise",
    "components",
    "leaders",
    "outputs",
)

FILES = {
    "projects": "projects.norm.tsv",
    "events": "event_counts.tsv",
    "scores": "scores.tsv",
    "sorted": "memberships.sorted.bin",
    "sorted_tsv": "memberships.sorted.tsv",
    "shared": "shared_edges.tsv",
    "graph_edges": "graph_edges.tsv",
    "blacklisted": "blacklisted_names.txt",
    "blacklist_used": "blacklist_used.txt",
    "final_edges": "final_edges.tsv",
    "removed": "removed_ids.txt",
    "components": "components.tsv",
    "leaders": "leaders.tsv",
    "dedup_map": "deduplicate_names",
    "noise": "forks_clones_noise_names",
    "metadata": "run_metadata.json",
    "counters": "counters.json",
    "manifest": "manifest.json",
    "rejects_ingest": "rejects_ingest.log",
    "rejects_sort": "rejects_sort.log",
}

# Checkpoints each stage needs before it can run.
PREREQUISITES = {
    "ingest": (),
    "score": ("projects", "events"),
    "sort": (),
    "shared": ("sorted", "scores"),
    "graph": ("projects", "shared"),
    "denoise": ("graph_edges",),
    "components": ("final_edges",),
    "leaders": ("components", "scores"),
    "outputs": ("components", "leaders", "projects", "removed", "blacklisted"),
}


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


@dataclass
class RunResult:
    work_dir: Path
    stages_run: list[str]
    counters: dict


class _Run:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.work_dir = config.work_dir

    def path(self, key: str) -> Path:
        return self.work_dir / FILES[key]

    def replace(self, key: str, writer: Callable[[Path], object]) -> None:
        """Write a checkpoint atomically: build under a tmp name, then rename."""
        final = self.path(key)
        tmp = final.with_name(final.name + ".tmp")
        writer(tmp)
        os.replace(tmp, final)

    def require(self, stage: str) -> None:
        missing = [FILES[k] for k in PREREQUISITES[stage] if not self.path(k).exists()]
        if missing:
            raise PipelineError(
                stage,
                f"missing checkpoints {missing}; run earlier stages first",
            )

    def merge_counters(self, stage: str, values: dict) -> None:
        counters = self.load_counters()
        counters[stage] = values
        self.replace(
            "counters",
            lambda p: p.write_text(
                json.dumps(counters, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            ),
        )

    def load_counters(self) -> dict:
        if self.path("counters").exists():
            return json.loads(self.path("counters").read_text(encoding="utf-8"))
        return {}

    # -- checkpoint loaders -------------------------------------------------

    def load_projects(self) -> Iterator[ingest.ProjectRecord]:
        with open(self.path("projects"), "r", encoding="utf-8") as src:
            for line in src:
                pid, name, forked, deleted = line.rstrip("\n").split("\t")
                yield ingest.ProjectRecord(
                    int(pid),
                    name,
                    int(forked) if forked else None,
                    deleted == "1",
                )

    def load_names(self) -> dict[int, str]:
        """id -> name for every project the pipeline still considers live."""
        filter_deleted = self.config.filter_deleted
        names: dict[int, str] = {}
        for rec in self.load_projects():
            if filter_deleted and rec.deleted:
                continue
            names.setdefault(rec.project_id, rec.name)
        return names

    def load_scores(self) -> scoring.ScoreLookup:
        return scoring.ScoreLookup(scoring.read_scores_tsv(self.path("scores")))


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as src:
        for block in iter(lambda: src.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _config_fingerprint(config: PipelineConfig) -> dict:
    return {
        "dump_format": config.dump_format,
        "delta": config.delta,
        "epoch": config.epoch.isoformat(),
        "min_shared": config.min_shared,
        "denoise_lo": config.denoise_lo,
        "denoise_hi": config.denoise_hi,
        "denoise_variant": config.denoise_variant,
        "leader_strategy": config.leader_strategy,
        "filter_deleted": config.filter_deleted,
    }


def build_manifest(config: PipelineConfig) -> dict:
    inputs = {
        table: _sha256(config.table_path(table))
        for table in KIND_TO_TABLE.values()
    }
    inputs["projects"] = _sha256(config.projects)
    inputs["project_commits"] = _sha256(config.project_commits)
    return {
        "inputs": inputs,
        "blacklist": _sha256(config.blacklist_path()),
        "config": _config_fingerprint(config),
    }


# -- stages ------------------------------------------------------------------


def _stage_ingest(run: _Run) -> dict:
    config = run.config
    rejects = ingest.RejectLog()

    def write_projects(path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            for rec in ingest.read_projects(config.projects, config.dump_format, rejects):
                forked = "" if rec.forked_from is None else str(rec.forked_from)
                out.write(f"{rec.project_id}\t{rec.name}\t{forked}\t{int(rec.deleted)}\n")

    run.replace("projects", write_projects)

    event_paths = {kind: config.table_path(table) for kind, table in KIND_TO_TABLE.items()}

    def write_events(path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            for rec in ingest.aggregate_event_counts(event_paths, config.dump_format, rejects):
                out.write(f"{rec.project_id}\t{rec.kind}\t{rec.value}\n")

    run.replace("events", write_events)
    run.replace("rejects_ingest", lambda p: rejects.write(p))
    return {"rejected_rows": rejects.count}


def _stage_score(run: _Run) -> dict:
    config = run.config
    project_ids = [rec.project_id for rec in run.load_projects()]

    def read_events() -> Iterator[ingest.EventCountRecord]:
        with open(run.path("events"), "r", encoding="utf-8") as src:
            for line in src:
                pid, kind, value = line.rstrip("\n").split("\t")
                yield ingest.EventCountRecord(int(pid), kind, int(value))

    warnings = scoring.ScoreWarnings()
    scored = scoring.score_all(
        read_events(),
        epoch=config.epoch,
        delta=config.delta,
        extra_ids=project_ids,
        warnings=warnings,
    )
    run.replace("scores", lambda p: scoring.write_scores_tsv(scored, p))
    return {"pre_epoch_commit_warnings": warnings.pre_epoch_commits}


def _stage_sort(run: _Run) -> dict:
    config = run.config
    rejects = ingest.RejectLog()
    written = {}

    def write_sorted(path: Path) -> None:
        written["records"] = commit_sharing.sort_memberships(
            config.project_commits,
            path,
            memory_budget=config.memory_budget,
            fmt=config.dump_format,
            rejects=rejects,
        )

    run.replace("sorted", write_sorted)
    if config.debug_sorted_tsv:
        run.replace(
            "sorted_tsv",
            lambda p: commit_sharing.write_memberships_tsv(run.path("sorted"), p),
        )
    run.replace("rejects_sort", lambda p: rejects.write(p))
    return {"sorted_records": written["records"], "rejected_rows": rejects.count}


def _stage_shared(run: _Run) -> dict:
    scores = run.load_scores()
    edges = commit_sharing.emit_shared_edges(
        commit_sharing.iter_sorted_memberships(run.path("sorted")),
        scores,
        min_shared=run.config.min_shared,
    )
    run.replace("shared", lambda p: commit_sharing.write_shared_edges_tsv(edges, p))
    return {"shared_edges": len(edges)}


def _stage_graph(run: _Run) -> dict:
    config = run.config
    names = run.load_names()
    rejects = ingest.RejectLog()
    blacklist = graph.load_blacklist(config.blacklist_path(), rejects)
    if rejects.count:
        raise PipelineError("graph", f"{rejects.count} unparseable blacklist rules")

    blacklisted_names = sorted(name for name in names.values() if blacklist.matches(name))
    stats = graph.GraphBuildStats()
    built = graph.build_graph(
        ingest.fork_edges(run.load_projects() if not config.filter_deleted else _live(run)),
        commit_sharing.read_shared_edges_tsv(run.path("shared")),
        blacklist,
        names,
        stats,
    )
    run.replace("graph_edges", lambda p: graph.write_edges_tsv(built, p))
    run.replace(
        "blacklisted",
        lambda p: p.write_text("".join(f"{n}\n" for n in blacklisted_names), encoding="utf-8"),
    )
    run.replace("blacklist_used", lambda p: shutil.copyfile(config.blacklist_path(), p))

    degrees = [built.degree(n) for n in built.nodes]
    multi = [d for d in degrees if d > 1]
    return {
        "nodes": len(built),
        "edges": built.edge_count(),
        "fork_edges": stats.fork_edges,
        "shared_commit_edges": stats.shared_edges,
        "dropped_unknown_edges": stats.dropped_unknown,
        "dropped_blacklisted_edges": stats.dropped_blacklisted,
        "blacklisted_projects": len(blacklisted_names),
        "mean_degree_above_one": (sum(multi) / len(multi)) if multi else 0.0,
    }


def _live(run: _Run) -> Iterator[ingest.ProjectRecord]:
    for rec in run.load_projects():
        if not rec.deleted:
            yield rec


def _stage_denoise(run: _Run) -> dict:
    config = run.config
    g = graph.read_edges_tsv(run.path("graph_edges"))
    cleaned, removed = graph.denoise(
        g, lo=config.denoise_lo, hi=config.denoise_hi, variant=config.denoise_variant
    )
    run.replace("final_edges", lambda p: graph.write_edges_tsv(cleaned, p))
    run.replace(
        "removed",
        lambda p: p.write_text("".join(f"{n}\n" for n in sorted(removed)), encoding="utf-8"),
    )
    return {"removed_nodes": len(removed), "edges_after": cleaned.edge_count()}


def _stage_components(run: _Run) -> dict:
    g = graph.read_edges_tsv(run.path("final_edges"))
    assignment = graph.connected_components(g)
    run.replace("components", lambda p: graph.write_components_tsv(assignment, p))
    return {"components": len(assignment.sizes)}


def _stage_leaders(run: _Run) -> dict:
    assignment = graph.read_components_tsv(run.path("components"))
    summaries = outputs.elect_leaders(assignment, run.load_scores(), run.config.leader_strategy)
    run.replace("leaders", lambda p: outputs.write_cluster_summaries(summaries, p))
    return {"clusters": len(summaries)}


def _stage_outputs(run: _Run) -> dict:
    names = run.load_names()
    assignment = graph.read_components_tsv(run.path("components"))
    summaries = list(outputs.read_cluster_summaries(run.path("leaders")))

    counts = {}

    def write_map(path: Path) -> None:
        counts["map"] = outputs.write_dedup_map(summaries, assignment, names, path)

    run.replace("dedup_map", write_map)

    removed_ids = [
        int(line)
        for line in run.path("removed").read_text(encoding="utf-8").splitlines()
        if line
    ]
    removed_names = [names[i] for i in removed_ids if i in names]
    blacklisted = run.path("blacklisted").read_text(encoding="utf-8").splitlines()
    sources = outputs.read_dedup_map(run.path("dedup_map"))

    def write_noise_file(path: Path) -> None:
        counts["noise"] = outputs.write_noise(sources.keys(), removed_names, blacklisted, path)

    run.replace("noise", write_noise_file)

    metadata = {
        "config": _config_fingerprint(run.config),
        "memory_budget": run.config.memory_budget,
        "blacklist_sha256": _sha256(run.path("blacklist_used")),
        "counters": run.load_counters(),
        "dedup_records": counts["map"],
        "noise_projects": counts["noise"],
    }
    run.replace(
        "metadata",
        lambda p: p.write_text(
            json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        ),
    )
    return {"dedup_records": counts["map"], "noise_projects": counts["noise"]}


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "score": _stage_score,
    "sort": _stage_sort,
    "shared": _stage_shared,
    "graph": _stage_graph,
    "denoise": _stage_denoise,
    "components": _stage_components,
    "leaders": _stage_leaders,
    "outputs": _stage_outputs,
}


def run(
    config: PipelineConfig,
    from_stage: str | None = None,
    stages: list[str] | None = None,
) -> RunResult:
    """Execute the pipeline, optionally resuming from a named stage.

    ``from_stage`` runs that stage and everything after it; ``stages``
    runs an explicit subset (their prerequisites must already be
    checkpointed).  Inputs are fingerprinted into a manifest; resuming on
    top of checkpoints built from different inputs is refused.
    """
    findings = validate(config)
    if findings:
        raise PipelineError("validate", "; ".join(findings))
    if from_stage is not None and stages is not None:
        raise ValueError("pass either from_stage or stages, not both")
    if from_stage is not None:
        if from_stage not in STAGES:
            raise PipelineError(from_stage, f"unknown stage; expected one of {STAGES}")
        selected = list(STAGES[STAGES.index(from_stage):])
    elif stages is not None:
        unknown = [s for s in stages if s not in STAGES]
        if unknown:
            raise PipelineError(unknown[0], f"unknown stage; expected one of {STAGES}")
        selected = [s for s in STAGES if s in stages]
    else:
        selected = list(STAGES)

    config.work_dir.mkdir(parents=True, exist_ok=True)
    runner = _Run(config)

    manifest = build_manifest(config)
    manifest_path = runner.path("manifest")
    if len(selected) < len(STAGES) and manifest_path.exists():
        previous = json.loads(manifest_path.read_text(encoding="utf-8"))
        if previous != manifest:
            raise PipelineError(
                selected[0],
                "inputs or config changed since checkpoints were written; rerun in full",
            )
    runner.replace(
        "manifest",
        lambda p: p.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        ),
    )

    for stage in selected:
        runner.require(stage)
        try:
            counters = _STAGE_FUNCS[stage](runner)
        except PipelineError:
            raise
        except Exception as err:
            raise PipelineError(stage, str(err)) from err
        runner.merge_counters(stage, counters)

    return RunResult(config.work_dir, selected, runner.load_counters())
