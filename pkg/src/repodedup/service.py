"""Read-mostly HTTP service over a finished run for the curation loop.

Analysts browse clusters, trace the paths that link projects, stage
blacklist rules, and preview how a component would re-cluster with those
rules applied.  The run's files are never touched; the only mutable state
is the staged-rule session file, kept in the same line format as the
blacklist input so it can feed the next pipeline run directly.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import graph as graphs
from . import outputs, scoring
from .pipeline import FILES

DEFAULT_SESSION_FILE = "staged_blacklist.txt"


class ClusterInfo(BaseModel):
    component_id: int
    size: int
    leader: str
    leader_score: float


class MemberInfo(BaseModel):
    name: str
    score: float


class PathNode(BaseModel):
    name: str
    score: float


class PathEdge(BaseModel):
    source: str
    target: str
    provenance: str


class PathResponse(BaseModel):
    nodes: list[PathNode]
    edges: list[PathEdge]


class RuleIn(BaseModel):
    kind: Literal["name", "suffix", "owner"]
    value: str = Field(min_length=1)


class RuleOut(BaseModel):
    id: str
    kind: str
    value: str


class StagedRules(BaseModel):
    rules: list[RuleOut]


class WhatIfRequest(BaseModel):
    component_id: int


class ResultingComponent(BaseModel):
    size: int
    leader: str


class WhatIfResponse(BaseModel):
    affected_component: int
    resulting_components: list[ResultingComponent]
    removed_nodes: list[str]
    note: str


WHATIF_NOTE = (
    "Preview recomputed on this component only; the full effect is realized "
    "by re-running the pipeline with the exported blacklist."
)


def rule_id(kind: str, value: str) -> str:
    return hashlib.sha1(f"{kind} {value}".encode("utf-8")).hexdigest()[:12]


class SessionStore:
    """Staged blacklist rules, persisted after every mutation."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()
        self._rules: dict[str, tuple[str, str]] = {}
        if path.exists():
            loaded = graphs.parse_blacklist_lines(
                path.read_text(encoding="utf-8").splitlines(), source=str(path)
            )
            for kind, value in loaded.rules():
                self._rules[rule_id(kind, value)] = (kind, value)

    def list_rules(self) -> list[RuleOut]:
        with self._lock:
            items = sorted(self._rules.items(), key=lambda kv: kv[1])
        return [RuleOut(id=rid, kind=kind, value=value) for rid, (kind, value) in items]

    def add(self, kind: str, value: str) -> RuleOut:
        rid = rule_id(kind, value)
        with self._lock:
            self._rules[rid] = (kind, value)
            self._save()
        return RuleOut(id=rid, kind=kind, value=value)

    def remove(self, rid: str) -> bool:
        with self._lock:
            if rid not in self._rules:
                return False
            del self._rules[rid]
            self._save()
            return True

    def ruleset(self) -> graphs.BlacklistRuleSet:
        with self._lock:
            return graphs.BlacklistRuleSet.from_rules(self._rules.values())

    def _save(self) -> None:
        text = "".join(f"{kind} {value}\n" for kind, value in sorted(self._rules.values()))
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(text, encoding="utf-8")


class RunSnapshot:
    """Immutable view of one finished pipeline run."""

    def __init__(self, work_dir: Path):
        self.work_dir = work_dir
        needed = ("projects", "scores", "final_edges", "components", "leaders", "metadata")
        missing = [FILES[k] for k in needed if not (work_dir / FILES[k]).exists()]
        if missing:
            raise FileNotFoundError(f"{work_dir} is not a finished run; missing {missing}")

        self.names: dict[int, str] = {}
        self.ids: dict[str, int] = {}
        with open(work_dir / FILES["projects"], "r", encoding="utf-8") as src:
            for line in src:
                pid, name, _forked, _deleted = line.rstrip("\n").split("\t")
                self.names[int(pid)] = name
                self.ids.setdefault(name, int(pid))

        self.scores = scoring.ScoreLookup(scoring.read_scores_tsv(work_dir / FILES["scores"]))
        self.graph = graphs.read_edges_tsv(work_dir / FILES["final_edges"])
        self.assignment = graphs.read_components_tsv(work_dir / FILES["components"])
        self.summaries = list(outputs.read_cluster_summaries(work_dir / FILES["leaders"]))
        metadata = json.loads((work_dir / FILES["metadata"]).read_text(encoding="utf-8"))
        self.denoise_lo = metadata["config"]["denoise_lo"]
        self.denoise_hi = metadata["config"]["denoise_hi"]
        self.denoise_variant = metadata["config"]["denoise_variant"]
        self.strategy = metadata["config"]["leader_strategy"]
        base = work_dir / FILES["blacklist_used"]
        self.base_blacklist = base.read_text(encoding="utf-8") if base.exists() else ""

    def name_of(self, pid: int) -> str:
        return self.names.get(pid, str(pid))


def create_app(
    work_dir: Path | str,
    session_path: Path | str | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    snapshot = RunSnapshot(Path(work_dir))
    session = SessionStore(
        Path(session_path) if session_path is not None else Path(work_dir) / DEFAULT_SESSION_FILE
    )
    app = FastAPI(title="repodedup inspection service")
    app.state.snapshot = snapshot
    app.state.session = session

    @app.get("/clusters", response_model=list[ClusterInfo])
    def clusters(min_size: int = Query(default=1, ge=1), limit: int = Query(default=100, ge=1)):
        rows = [s for s in snapshot.summaries if s.size >= min_size]
        rows.sort(key=lambda s: (-s.size, s.component_id))
        return [
            ClusterInfo(
                component_id=s.component_id,
                size=s.size,
                leader=snapshot.name_of(s.leader),
                leader_score=s.leader_score,
            )
            for s in rows[:limit]
        ]

    @app.get("/clusters/{component_id}/members", response_model=list[MemberInfo])
    def cluster_members(component_id: int):
        members = snapshot.assignment.members_by_component().get(component_id)
        if members is None:
            raise HTTPException(status_code=404, detail=f"unknown component {component_id}")
        ranked = sorted(members, key=lambda pid: snapshot.scores.rank_key(pid))
        return [
            MemberInfo(name=snapshot.name_of(pid), score=snapshot.scores[pid].mean_metric)
            for pid in ranked
        ]

    @app.get("/path", response_model=PathResponse)
    def path(
        from_name: str = Query(alias="from"),
        to_name: str = Query(alias="to"),
    ):
        endpoints = []
        for name in (from_name, to_name):
            pid = snapshot.ids.get(name)
            if pid is None or pid not in snapshot.graph:
                raise HTTPException(status_code=404, detail=f"unknown project {name!r}")
            endpoints.append(pid)
        found = graphs.shortest_path(snapshot.graph, endpoints[0], endpoints[1])
        if found is None:
            raise HTTPException(
                status_code=404, detail=f"no path between {from_name!r} and {to_name!r}"
            )
        nodes = [
            PathNode(name=snapshot.name_of(pid), score=snapshot.scores[pid].mean_metric)
            for pid in found.nodes
        ]
        edges = [
            PathEdge(
                source=snapshot.name_of(a),
                target=snapshot.name_of(b),
                provenance=prov,
            )
            for a, b, prov in zip(found.nodes, found.nodes[1:], found.provenance)
        ]
        return PathResponse(nodes=nodes, edges=edges)

    @app.get("/blacklist", response_model=StagedRules)
    def staged_rules():
        return StagedRules(rules=session.list_rules())

    @app.post("/blacklist", response_model=RuleOut)
    def stage_rule(rule: RuleIn):
        return session.add(rule.kind, rule.value)

    @app.delete("/blacklist/{rid}")
    def unstage_rule(rid: str):
        if not session.remove(rid):
            raise HTTPException(status_code=404, detail=f"no staged rule {rid!r}")
        return {"removed": rid}

    @app.post("/whatif", response_model=WhatIfResponse)
    def whatif(request: WhatIfRequest):
        members = snapshot.assignment.members_by_component().get(request.component_id)
        if members is None:
            raise HTTPException(
                status_code=404, detail=f"unknown component {request.component_id}"
            )
        leader_of = {s.component_id: s.leader for s in snapshot.summaries}
        rules = session.ruleset()
        matched = {m for m in members if rules.matches(snapshot.name_of(m))}
        if not matched:
            return WhatIfResponse(
                affected_component=request.component_id,
                resulting_components=[
                    ResultingComponent(
                        size=len(members),
                        leader=snapshot.name_of(leader_of[request.component_id]),
                    )
                ],
                removed_nodes=[],
                note=WHATIF_NOTE,
            )

        kept = [m for m in members if m not in matched]
        induced = graphs.DedupGraph()
        for node in kept:
            induced.add_node(node)
        for a, b, prov in snapshot.graph.edges():
            if a in induced and b in induced:
                induced.add_edge(a, b, prov)

        cleaned, denoised_away = graphs.denoise(
            induced,
            lo=snapshot.denoise_lo,
            hi=snapshot.denoise_hi,
            variant=snapshot.denoise_variant,
        )
        final = graphs.DedupGraph()
        for node in cleaned.nodes - denoised_away:
            final.add_node(node)
        for a, b, prov in cleaned.edges():
            final.add_edge(a, b, prov)

        parts = graphs.connected_components(final)
        resulting = []
        for _, comp_members in sorted(parts.members_by_component().items()):
            leader = min(comp_members, key=lambda pid: snapshot.scores.strategy_key(pid, snapshot.strategy))
            resulting.append(
                ResultingComponent(size=len(comp_members), leader=snapshot.name_of(leader))
            )
        resulting.sort(key=lambda c: (-c.size, c.leader))
        removed = sorted(snapshot.name_of(m) for m in (matched | denoised_away))
        return WhatIfResponse(
            affected_component=request.component_id,
            resulting_components=resulting,
            removed_nodes=removed,
            note=WHATIF_NOTE,
        )

    @app.get("/export/blacklist", response_class=PlainTextResponse)
    def export_blacklist():
        staged = session.ruleset()
        text = snapshot.base_blacklist
        if staged:
            if text and not text.endswith("\n"):
                text += "\n"
            text += graphs.format_blacklist(staged)
        return text

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
