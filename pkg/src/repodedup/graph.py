"""The combined fork + shared-commit graph and its cleaning passes.

Everything here treats the graph as undirected and unweighted.  Blacklist
rules keep spuriously-linking projects out of the graph altogether, the
denoise pass disconnects low-degree nodes that merge unrelated clusters,
and connected components over the result are the dedup groups.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .commit_sharing import SharedEdge
from .ingest import RejectLog

FORK = "fork"
SHARED_COMMIT = "shared_commit"
BOTH = "both"

RULE_KINDS = ("name", "suffix", "owner")

DENOISE_VARIANTS = ("formula", "naive")


class UnknownNodeError(KeyError):
    """A path query referenced a project that is not in the graph."""


class DedupGraph:
    """Undirected graph over project ids with provenance-tagged edges."""

    def __init__(self) -> None:
        self._adj: dict[int, dict[int, str]] = {}

    def add_node(self, node: int) -> None:
        self._adj.setdefault(node, {})

    def add_edge(self, a: int, b: int, provenance: str) -> None:
        if a == b:
            raise ValueError(f"self-loop on project {a}")
        current = self._adj.setdefault(a, {}).get(b)
        merged = _merge_provenance(current, provenance)
        self._adj[a][b] = merged
        self._adj.setdefault(b, {})[a] = merged

    @property
    def nodes(self) -> set[int]:
        return set(self._adj)

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def neighbors(self, node: int) -> Iterator[int]:
        return iter(self._adj[node])

    def provenance(self, a: int, b: int) -> str:
        return self._adj[a][b]

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def edges(self) -> Iterator[tuple[int, int, str]]:
        """Each undirected edge once, as (small id, large id, provenance)."""
        for a, nbrs in self._adj.items():
            for b, prov in nbrs.items():
                if a < b:
                    yield a, b, prov


def _merge_provenance(current: str | None, incoming: str) -> str:
    if current is None or current == incoming:
        return incoming
    return BOTH


@dataclass(frozen=True)
class BlacklistRuleSet:
    """Exact names, name suffixes, and owner logins to exclude.

    All matching is case-sensitive string comparison; there is no pattern
    language beyond the suffix test.
    """

    exact: frozenset[str] = frozenset()
    suffixes: frozenset[str] = frozenset()
    owners: frozenset[str] = frozenset()

    def matches(self, name: str) -> bool:
        if name in self.exact:
            return True
        if any(name.endswith(s) for s in self.suffixes):
            return True
        return name.split("/", 1)[0] in self.owners

    def __bool__(self) -> bool:
        return bool(self.exact or self.suffixes or self.owners)

    def rules(self) -> list[tuple[str, str]]:
        out = [("name", v) for v in sorted(self.exact)]
        out += [("suffix", v) for v in sorted(self.suffixes)]
        out += [("owner", v) for v in sorted(self.owners)]
        return out

    @classmethod
    def from_rules(cls, rules: Iterable[tuple[str, str]]) -> "BlacklistRuleSet":
        exact, suffixes, owners = set(), set(), set()
        for kind, value in rules:
            if kind == "name":
                exact.add(value)
            elif kind == "suffix":
                suffixes.add(value)
            elif kind == "owner":
                owners.add(value)
            else:
                raise ValueError(f"unknown blacklist rule kind {kind!r}")
        return cls(frozenset(exact), frozenset(suffixes), frozenset(owners))

    def merged_with(self, other: "BlacklistRuleSet") -> "BlacklistRuleSet":
        return BlacklistRuleSet(
            self.exact | other.exact,
            self.suffixes | other.suffixes,
            self.owners | other.owners,
        )


def parse_blacklist_lines(
    lines: Iterable[str],
    source: str = "<blacklist>",
    rejects: RejectLog | None = None,
) -> BlacklistRuleSet:
    """Parse the line-oriented rule file: `name a/b`, `suffix s`, `owner o`.

    Blank lines and `#` comments are skipped; anything else that does not
    split into a known kind and a single value is rejected.
    """
    rules: list[tuple[str, str]] = []
    for line_no, line in enumerate(lines, start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        parts = body.split()
        if len(parts) != 2 or parts[0] not in RULE_KINDS:
            if rejects is not None:
                rejects.record(source, line_no, f"unparseable blacklist rule: {body!r}")
            continue
        rules.append((parts[0], parts[1]))
    return BlacklistRuleSet.from_rules(rules)


def load_blacklist(path: Path | str, rejects: RejectLog | None = None) -> BlacklistRuleSet:
    with open(path, "r", encoding="utf-8") as src:
        return parse_blacklist_lines(src, source=str(path), rejects=rejects)


def format_blacklist(rules: BlacklistRuleSet) -> str:
    return "".join(f"{kind} {value}\n" for kind, value in rules.rules())


@dataclass
class GraphBuildStats:
    fork_edges: int = 0
    shared_edges: int = 0
    dropped_unknown: int = 0
    dropped_blacklisted: int = 0


def build_graph(
    fork_edges: Iterable[tuple[int, int]],
    shared: Iterable[SharedEdge],
    blacklist: BlacklistRuleSet,
    names: Mapping[int, str],
    stats: GraphBuildStats | None = None,
) -> DedupGraph:
    """Merge fork ancestry and shared-commit pairs into one graph.

    Edges touching a blacklisted project are omitted entirely, so such a
    project never even appears as a node.  Edges referencing an id without
    a name are dropped and counted (names are the deliverable downstream).
    """
    stats = stats if stats is not None else GraphBuildStats()
    graph = DedupGraph()

    def admit(a: int, b: int, provenance: str) -> None:
        if a == b:
            stats.dropped_unknown += 1
            return
        name_a = names.get(a)
        name_b = names.get(b)
        if name_a is None or name_b is None:
            stats.dropped_unknown += 1
            return
        if blacklist.matches(name_a) or blacklist.matches(name_b):
            stats.dropped_blacklisted += 1
            return
        graph.add_edge(a, b, provenance)
        if provenance == FORK:
            stats.fork_edges += 1
        else:
            stats.shared_edges += 1

    for child, parent in fork_edges:
        admit(child, parent, FORK)
    for edge in shared:
        admit(edge.p1, edge.p2, SHARED_COMMIT)
    return graph


def denoise(
    g: DedupGraph,
    lo: int = 2,
    hi: int = 5,
    variant: str = "formula",
) -> tuple[DedupGraph, set[int]]:
    """Disconnect noise nodes of degree lo..hi in one simultaneous pass.

    Under the ``formula`` variant a candidate node n stays only if the sum
    of its neighbors' degrees equals n's own degree, which is exactly the
    case where n plus its immediate neighbors form an isolated component.
    The ``naive`` variant removes every candidate unconditionally.  All
    decisions read degrees of the input graph, so the outcome does not
    depend on iteration order.  Removed nodes stay in the graph as
    isolated nodes; the removed set is reported for the noise listing.
    """
    if lo > hi:
        raise ValueError(f"denoise bounds out of order: lo={lo} hi={hi}")
    if variant not in DENOISE_VARIANTS:
        raise ValueError(f"unknown denoise variant {variant!r}")
    removed: set[int] = set()
    for node in g.nodes:
        d = g.degree(node)
        if d < lo or d > hi:
            continue
        if variant == "naive":
            removed.add(node)
            continue
        neighbor_degree_sum = sum(g.degree(n) for n in g.neighbors(node))
        if neighbor_degree_sum != d:
            removed.add(node)

    cleaned = DedupGraph()
    for node in g.nodes:
        cleaned.add_node(node)
    for a, b, prov in g.edges():
        if a not in removed and b not in removed:
            cleaned.add_edge(a, b, prov)
    return cleaned, removed


@dataclass
class ComponentAssignment:
    """Dense component ids, numbered in order of each class's smallest member."""

    component_of: dict[int, int] = field(default_factory=dict)
    sizes: dict[int, int] = field(default_factory=dict)

    def members_by_component(self) -> dict[int, list[int]]:
        members: dict[int, list[int]] = {}
        for node, comp in self.component_of.items():
            members.setdefault(comp, []).append(node)
        for group in members.values():
            group.sort()
        return members


def connected_components(g: DedupGraph) -> ComponentAssignment:
    """Union-find over the edge relation; isolated nodes become singletons."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for node in g.nodes:
        parent[node] = node
    for a, b, _ in g.edges():
        ra, rb = find(a), find(b)
        if ra != rb:
            # Anchor on the smaller id so roots are deterministic.
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    classes: dict[int, list[int]] = {}
    for node in parent:
        classes.setdefault(find(node), []).append(node)

    assignment = ComponentAssignment()
    for comp_id, root in enumerate(sorted(classes, key=lambda r: min(classes[r]))):
        members = classes[root]
        assignment.sizes[comp_id] = len(members)
        for node in members:
            assignment.component_of[node] = comp_id
    return assignment


@dataclass(frozen=True)
class PathResult:
    nodes: list[int]
    provenance: list[str]  # one entry per hop


def shortest_path(g: DedupGraph, src: int, dst: int) -> PathResult | None:
    """Minimum-hop path between two projects, or None if disconnected.

    Neighbors are expanded in ascending id order, so among equally short
    paths the one preferring smaller next ids wins -- deterministic across
    runs and machines.
    """
    if src not in g:
        raise UnknownNodeError(src)
    if dst not in g:
        raise UnknownNodeError(dst)
    if src == dst:
        return PathResult([src], [])

    parent: dict[int, int] = {src: src}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nbr in sorted(g.neighbors(node)):
            if nbr in parent:
                continue
            parent[nbr] = node
            if nbr == dst:
                queue.clear()
                break
            queue.append(nbr)
    if dst not in parent:
        return None

    nodes = [dst]
    while nodes[-1] != src:
        nodes.append(parent[nodes[-1]])
    nodes.reverse()
    provenance = [g.provenance(a, b) for a, b in zip(nodes, nodes[1:])]
    return PathResult(nodes, provenance)


def _dot_quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(
    g: DedupGraph,
    names: Mapping[int, str],
    nodes: set[int] | None = None,
) -> str:
    """Render the graph (or the induced subgraph on ``nodes``) as DOT text."""
    selected = g.nodes if nodes is None else (g.nodes & nodes)
    label = {n: names.get(n, str(n)) for n in selected}
    lines = ["graph dedup {"]
    for node in sorted(selected, key=lambda n: label[n]):
        lines.append(f"  {_dot_quote(label[node])};")
    edge_rows = []
    for a, b, prov in g.edges():
        if a in selected and b in selected:
            la, lb = sorted((label[a], label[b]))
            edge_rows.append(f"  {_dot_quote(la)} -- {_dot_quote(lb)} [provenance={_dot_quote(prov)}];")
    lines.extend(sorted(edge_rows))
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_components_tsv(assignment: ComponentAssignment, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for node in sorted(assignment.component_of):
            out.write(f"{node}\t{assignment.component_of[node]}\n")


def read_components_tsv(path: Path | str) -> ComponentAssignment:
    assignment = ComponentAssignment()
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            node, comp = line.rstrip("\n").split("\t")
            assignment.component_of[int(node)] = int(comp)
            assignment.sizes[int(comp)] = assignment.sizes.get(int(comp), 0) + 1
    return assignment


def write_edges_tsv(g: DedupGraph, path: Path | str) -> None:
    """Edge dump `a<TAB>b<TAB>provenance` with a < b, plus isolated nodes.

    Isolated nodes are written as `a<TAB><TAB>isolated` so a graph survives
    a round-trip through its own dump.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        isolated = {n for n in g.nodes if g.degree(n) == 0}
        for a, b, prov in sorted(g.edges()):
            out.write(f"{a}\t{b}\t{prov}\n")
        for node in sorted(isolated):
            out.write(f"{node}\t\tisolated\n")


def read_edges_tsv(path: Path | str) -> DedupGraph:
    g = DedupGraph()
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            a, b, prov = line.rstrip("\n").split("\t")
            if prov == "isolated":
                g.add_node(int(a))
            else:
                g.add_edge(int(a), int(b), prov)
    return g
