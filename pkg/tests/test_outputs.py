import pytest

from repodedup.graph import ComponentAssignment
from repodedup.outputs import (
    ClusterSummary,
    MissingNameError,
    dedup_pairs,
    elect_leaders,
    read_cluster_summaries,
    read_dedup_map,
    read_noise,
    write_cluster_summaries,
    write_dedup_map,
    write_noise,
)
from repodedup.scoring import MetricVector, ScoreLookup, ScoredProject


def assignment_of(*components):
    assign = ComponentAssignment()
    for comp_id, members in enumerate(components):
        assign.sizes[comp_id] = len(members)
        for m in members:
            assign.component_of[m] = comp_id
    return assign


def lookup(scores):
    return ScoreLookup(
        [
            ScoredProject(pid, mean, MetricVector(stars=stars, forks=forks))
            for pid, (mean, stars, forks) in scores.items()
        ]
    )


SCORES = lookup(
    {
        1: (5.0, 1, 9),
        2: (3.0, 8, 0),
        3: (1.0, 2, 2),
        7: (2.0, 0, 0),
    }
)


class TestElectLeaders:
    def test_highest_mean_wins(self):
        assign = assignment_of([1, 2, 3])
        (summary,) = elect_leaders(assign, SCORES)
        assert summary == ClusterSummary(0, 3, 1, 5.0)

    def test_singleton_component(self):
        (summary,) = elect_leaders(assignment_of([7]), SCORES)
        assert summary == ClusterSummary(0, 1, 7, 2.0)

    def test_strategies_disagree_when_metrics_disagree(self):
        assign = assignment_of([1, 2, 3])
        by_mean = elect_leaders(assign, SCORES, "mean")[0].leader
        by_stars = elect_leaders(assign, SCORES, "stars")[0].leader
        by_forks = elect_leaders(assign, SCORES, "forks")[0].leader
        # Brute-force argmax over the members, per strategy.
        members = [1, 2, 3]
        assert by_mean == min(members, key=lambda p: (-SCORES[p].mean_metric, p)) == 1
        assert by_stars == min(members, key=lambda p: (-SCORES[p].metrics.stars, p)) == 2
        assert by_forks == min(members, key=lambda p: (-SCORES[p].metrics.forks, p)) == 1

    def test_tie_breaks_to_smaller_id(self):
        scores = lookup({4: (1.0, 0, 0), 9: (1.0, 0, 0)})
        (summary,) = elect_leaders(assignment_of([9, 4]), scores)
        assert summary.leader == 4

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValueError):
            elect_leaders(assignment_of([1]), SCORES, "issues")


NAMES = {1: "a/lead", 2: "b/two", 3: "c/three", 7: "d/solo"}


class TestDedupMap:
    def test_component_writes_non_leader_lines(self, tmp_path):
        assign = assignment_of([1, 2, 3])
        summaries = elect_leaders(assign, SCORES)
        out = tmp_path / "deduplicate_names"
        count = write_dedup_map(summaries, assign, NAMES, out)
        assert count == 2
        assert out.read_text(encoding="utf-8") == "b/two\ta/lead\nc/three\ta/lead\n"

    def test_all_singletons_write_empty_file(self, tmp_path):
        assign = assignment_of([1], [2], [7])
        summaries = elect_leaders(assign, SCORES)
        out = tmp_path / "deduplicate_names"
        assert write_dedup_map(summaries, assign, NAMES, out) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_lines_sorted_by_source_name(self, tmp_path):
        assign = assignment_of([1, 3, 2])
        summaries = elect_leaders(assign, SCORES)
        pairs = dedup_pairs(summaries, assign, NAMES)
        assert pairs == sorted(pairs)

    def test_missing_name_is_fatal(self, tmp_path):
        assign = assignment_of([1, 2, 99])
        summaries = elect_leaders(assign, SCORES)
        with pytest.raises(MissingNameError):
            write_dedup_map(summaries, assign, NAMES, tmp_path / "x")

    def test_map_reader_counts_rejects(self, tmp_path):
        path = tmp_path / "map"
        path.write_text("a\tb\nbroken\nc\td\n", encoding="utf-8")

        class Rejects:
            def __init__(self):
                self.rows = []

            def record(self, *row):
                self.rows.append(row)

        rejects = Rejects()
        mapping = read_dedup_map(path, rejects)
        assert mapping == {"a": "b", "c": "d"}
        assert len(rejects.rows) == 1


class TestNoise:
    def test_single_two_cluster(self, tmp_path):
        out = tmp_path / "noise"
        count = write_noise(["b/two"], [], [], out)
        assert count == 1
        assert out.read_text(encoding="utf-8") == "b/two\n"

    def test_blacklisted_always_in_noise_never_in_map(self, tmp_path):
        out = tmp_path / "noise"
        write_noise(["b/two"], ["gone/denoised"], ["x/x.github.io"], out)
        noise = read_noise(out)
        assert "x/x.github.io" in noise
        assert noise == {"b/two", "gone/denoised", "x/x.github.io"}

    def test_noise_is_superset_of_sources(self, tmp_path):
        sources = ["s/1", "s/2", "s/3"]
        out = tmp_path / "noise"
        write_noise(sources, ["d/1"], [], out)
        assert read_noise(out) >= set(sources)


def test_cluster_summary_round_trip(tmp_path):
    summaries = [ClusterSummary(0, 3, 1, 5.0), ClusterSummary(1, 1, 7, 2.0)]
    path = tmp_path / "leaders.tsv"
    write_cluster_summaries(summaries, path)
    assert list(read_cluster_summaries(path)) == summaries
