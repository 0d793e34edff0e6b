import json

import pytest
from fastapi.testclient import TestClient

from repodedup.graph import parse_blacklist_lines
from repodedup.ingest import RejectLog
from repodedup.service import create_app


@pytest.fixture()
def client(dumbbell_run, tmp_path):
    app = create_app(dumbbell_run.work_dir, session_path=tmp_path / "session.txt")
    return TestClient(app)


def synthetic_run(root, components: dict[int, list[tuple[int, str]]]):
    """Write a minimal finished-run directory from a component spec."""
    root.mkdir(parents=True, exist_ok=True)
    projects, scores, comp_rows, leader_rows = [], [], [], []
    for comp_id, members in components.items():
        for pid, name in members:
            projects.append(f"{pid}\t{name}\t\t0")
            scores.append(f"{pid}\t{float(pid):.9f}" + "\t0.000000000" * 6)
            comp_rows.append(f"{pid}\t{comp_id}")
        leader = max(members)[0]
        leader_rows.append(f"{comp_id}\t{len(members)}\t{leader}\t{float(leader):.9f}")
    (root / "projects.norm.tsv").write_text("".join(r + "\n" for r in projects))
    (root / "scores.tsv").write_text("".join(r + "\n" for r in scores))
    (root / "final_edges.tsv").write_text(
        "".join(f"{pid}\t\tisolated\n" for members in components.values() for pid, _ in members)
    )
    (root / "components.tsv").write_text("".join(r + "\n" for r in comp_rows))
    (root / "leaders.tsv").write_text("".join(r + "\n" for r in leader_rows))
    (root / "run_metadata.json").write_text(
        json.dumps(
            {
                "config": {
                    "denoise_lo": 2,
                    "denoise_hi": 5,
                    "denoise_variant": "formula",
                    "leader_strategy": "mean",
                }
            }
        )
    )
    (root / "blacklist_used.txt").write_text("suffix github.io\n")
    return root


class TestClusters:
    def test_sorted_by_size_descending(self, client):
        rows = client.get("/clusters").json()
        assert [(r["size"], r["leader"]) for r in rows] == [
            (22, "dia/a"),
            (15, "alpha/core"),
        ]

    def test_min_size_filters(self, client):
        rows = client.get("/clusters", params={"min_size": 16}).json()
        assert [r["size"] for r in rows] == [22]

    def test_limit_returns_largest_only(self, client):
        rows = client.get("/clusters", params={"limit": 1}).json()
        assert len(rows) == 1
        assert rows[0]["size"] == 22

    def test_synthetic_sizes_5_3_2(self, tmp_path):
        run = synthetic_run(
            tmp_path / "run",
            {
                0: [(i, f"a/p{i}") for i in range(1, 6)],
                1: [(i, f"b/p{i}") for i in range(10, 13)],
                2: [(i, f"c/p{i}") for i in range(20, 22)],
            },
        )
        client = TestClient(create_app(run))
        rows = client.get("/clusters", params={"min_size": 3}).json()
        assert [r["size"] for r in rows] == [5, 3]

    def test_empty_run_empty_list(self, tmp_path):
        run = synthetic_run(tmp_path / "run", {})
        client = TestClient(create_app(run))
        assert client.get("/clusters").json() == []

    def test_member_drilldown_ranked_by_score(self, client):
        members = client.get("/clusters/0/members").json()
        assert members[0]["name"] == "alpha/core"  # highest mean in the dumbbell
        assert members[1]["name"] == "beta/core"
        assert len(members) == 15
        scores = [m["score"] for m in members]
        assert scores == sorted(scores, reverse=True)

    def test_member_drilldown_unknown_component(self, client):
        assert client.get("/clusters/99/members").status_code == 404


class TestPath:
    def test_diamond_tie_breaks_to_smaller_id(self, client):
        got = client.get("/path", params={"from": "dia/a", "to": "dia/d"}).json()
        assert [n["name"] for n in got["nodes"]] == ["dia/a", "dia/c", "dia/d"]
        assert [e["provenance"] for e in got["edges"]] == ["shared_commit"] * 2
        assert all(n["score"] >= 0 for n in got["nodes"])

    def test_connected_pair_within_dumbbell(self, client):
        got = client.get("/path", params={"from": "alpha/core", "to": "beta/core"}).json()
        names = [n["name"] for n in got["nodes"]]
        assert names[0] == "alpha/core"
        assert names[-1] == "beta/core"
        assert "megahub/linker" in names  # the only route crosses the bridge

    def test_disconnected_pair_404(self, client):
        response = client.get("/path", params={"from": "alpha/core", "to": "dia/a"})
        assert response.status_code == 404
        assert "no path" in response.json()["detail"]

    def test_unknown_project_404(self, client):
        response = client.get("/path", params={"from": "nobody/nothing", "to": "dia/a"})
        assert response.status_code == 404
        assert "unknown" in response.json()["detail"]


class TestBlacklistStaging:
    def test_stage_then_list(self, client):
        created = client.post("/blacklist", json={"kind": "name", "value": "foo/bar"})
        assert created.status_code == 200
        rules = client.get("/blacklist").json()["rules"]
        assert [(r["kind"], r["value"]) for r in rules] == [("name", "foo/bar")]

    def test_delete_unknown_rule_is_an_error(self, client):
        assert client.delete("/blacklist/deadbeef").status_code == 404

    def test_delete_staged_rule(self, client):
        rid = client.post("/blacklist", json={"kind": "owner", "value": "spam"}).json()["id"]
        assert client.delete(f"/blacklist/{rid}").status_code == 200
        assert client.get("/blacklist").json()["rules"] == []

    def test_staged_rules_survive_restart(self, dumbbell_run, tmp_path):
        session = tmp_path / "session.txt"
        first = TestClient(create_app(dumbbell_run.work_dir, session_path=session))
        first.post("/blacklist", json={"kind": "suffix", "value": "github.io"})
        reborn = TestClient(create_app(dumbbell_run.work_dir, session_path=session))
        rules = reborn.get("/blacklist").json()["rules"]
        assert [(r["kind"], r["value"]) for r in rules] == [("suffix", "github.io")]

    def test_invalid_rule_kind_rejected(self, client):
        assert client.post("/blacklist", json={"kind": "regex", "value": ".*"}).status_code == 422


class TestWhatIf:
    DUMBBELL = 0
    DIAMOND = 1

    def test_staging_bridge_splits_dumbbell_in_two(self, client):
        client.post("/blacklist", json={"kind": "name", "value": "megahub/linker"})
        got = client.post("/whatif", json={"component_id": self.DUMBBELL}).json()
        assert got["removed_nodes"] == ["megahub/linker"]
        parts = [(c["size"], c["leader"]) for c in got["resulting_components"]]
        assert parts == [(7, "alpha/core"), (7, "beta/core")]
        assert sum(c["size"] for c in got["resulting_components"]) == 15 - 1

    def test_no_staged_rules_is_identity(self, client):
        got = client.post("/whatif", json={"component_id": self.DUMBBELL}).json()
        assert got["resulting_components"] == [{"size": 15, "leader": "alpha/core"}]
        assert got["removed_nodes"] == []

    def test_rules_touching_other_components_are_identity(self, client):
        client.post("/blacklist", json={"kind": "name", "value": "megahub/linker"})
        got = client.post("/whatif", json={"component_id": self.DIAMOND}).json()
        assert got["resulting_components"] == [{"size": 22, "leader": "dia/a"}]

    def test_staging_a_leaf_leaves_count_unchanged(self, client):
        client.post("/blacklist", json={"kind": "name", "value": "leafb0/x"})
        got = client.post("/whatif", json={"component_id": self.DIAMOND}).json()
        assert len(got["resulting_components"]) == 1
        assert got["resulting_components"][0]["size"] == 21

    def test_unknown_component_404(self, client):
        assert client.post("/whatif", json={"component_id": 999}).status_code == 404

    def test_response_surfaces_preview_scope(self, client):
        got = client.post("/whatif", json={"component_id": self.DUMBBELL}).json()
        assert "re-running the pipeline" in got["note"]


class TestExport:
    def test_no_staged_rules_returns_base_verbatim(self, client, dumbbell_run):
        base = (dumbbell_run.work_dir / "blacklist_used.txt").read_text(encoding="utf-8")
        assert client.get("/export/blacklist").text == base

    def test_staged_rules_appended(self, client):
        client.post("/blacklist", json={"kind": "name", "value": "foo/bar"})
        text = client.get("/export/blacklist").text
        assert text.endswith("name foo/bar\n")

    def test_export_reparses_with_zero_rejects(self, client):
        client.post("/blacklist", json={"kind": "suffix", "value": "github.io"})
        client.post("/blacklist", json={"kind": "owner", "value": "spam"})
        rejects = RejectLog()
        rules = parse_blacklist_lines(
            client.get("/export/blacklist").text.splitlines(), rejects=rejects
        )
        assert rejects.count == 0
        assert rules.suffixes == frozenset({"github.io"})
        assert rules.owners == frozenset({"spam"})


class TestImmutability:
    def test_service_never_mutates_run_artifacts(self, dumbbell_run, tmp_path):
        work = dumbbell_run.work_dir
        before = {p.name: p.read_bytes() for p in work.iterdir() if p.is_file()}
        client = TestClient(create_app(work, session_path=tmp_path / "session.txt"))
        client.post("/blacklist", json={"kind": "name", "value": "megahub/linker"})
        client.post("/whatif", json={"component_id": 0})
        client.get("/clusters")
        after = {p.name: p.read_bytes() for p in work.iterdir() if p.is_file()}
        assert after == before
