"""SSSP tests: oracle agreement, pop accounting, bucket structure, and the
DIMACS / TSV graph loaders."""

import math

import pytest

from relaxsched.errors import InputError, ParseError
from relaxsched.graphs import (
    WeightedDigraph,
    generate_random_graph,
    load_graph,
    write_dimacs,
)
from relaxsched.sched import SchedulerConfig
from relaxsched.sssp import bucket_stats, dijkstra_oracle, relaxed_sssp

INF = math.inf


def path_graph():
    # s -> a (1) -> b (1)
    return WeightedDigraph(3, [(0, 1, 1), (1, 2, 1)])


class TestDijkstraOracle:
    def test_single_vertex(self):
        assert dijkstra_oracle(WeightedDigraph(1, [])) == [0]

    def test_disconnected_vertex(self):
        g = WeightedDigraph(3, [(0, 1, 5)])
        assert dijkstra_oracle(g) == [0, 5, INF]

    def test_parents_follow_shortest_paths(self):
        g = generate_random_graph(100, 300, 0)
        dist, parent = dijkstra_oracle(g, with_parents=True)
        for v in range(100):
            if parent[v] != -1:
                weight = min(w for u, w in g.out_edges(parent[v]) if u == v)
                assert dist[v] == dist[parent[v]] + weight


class TestRelaxedSssp:
    def test_path_graph_exact(self):
        dist, stats = relaxed_sssp(path_graph(), SchedulerConfig())
        assert dist == [0, 1, 2]
        assert stats.total_pops == 3
        assert stats.stale_pops == 0

    @pytest.mark.parametrize("config", [
        SchedulerConfig(kind="exact"),
        SchedulerConfig(kind="adversarial", k=3, rng_seed=1),
        SchedulerConfig(kind="multiqueue", q=2, rng_seed=2),
    ])
    def test_diamond(self, config):
        g = WeightedDigraph(3, [(0, 1, 1), (0, 2, 5), (1, 2, 1)])
        dist, _ = relaxed_sssp(g, config)
        assert dist[2] == 2

    @pytest.mark.parametrize("kind,extra", [
        ("exact", {}),
        ("adversarial", {"k": 4}),
        ("adversarial", {"k": 8, "adversary_strategy": "delay-top"}),
        ("multiqueue", {"q": 8}),
    ])
    def test_matches_oracle(self, kind, extra):
        g = generate_random_graph(500, 2500, 11)
        oracle = dijkstra_oracle(g)
        for seed in range(3):
            cfg = SchedulerConfig(kind=kind, rng_seed=seed, **extra)
            dist, _ = relaxed_sssp(g, cfg)
            assert dist == oracle

    def test_exact_pop_counts(self):
        g = generate_random_graph(500, 2500, 4)
        dist, stats = relaxed_sssp(g, SchedulerConfig())
        assert stats.total_pops == stats.reachable
        assert stats.stale_pops == 0

    def test_insert_only_negative_control(self):
        # Without decrease-key, duplicate copies cause stale pops but the
        # distances still converge.
        g = generate_random_graph(300, 2000, 6)
        dist, stats = relaxed_sssp(
            g, SchedulerConfig(kind="multiqueue", q=4, rng_seed=6),
            duplicates="insert-only")
        assert dist == dijkstra_oracle(g)
        assert stats.total_pops > stats.reachable
        assert stats.stale_pops > 0

    def test_pessimistic_convention_surcharge(self):
        g = generate_random_graph(300, 2000, 8)
        cfg = SchedulerConfig(kind="adversarial", k=8, rng_seed=8)
        dist, stats = relaxed_sssp(g, cfg, pop_convention="pessimistic")
        assert dist == dijkstra_oracle(g)
        assert stats.skipped_pops >= 0
        raw_dist, raw = relaxed_sssp(g, cfg)
        assert stats.total_pops == raw.total_pops

    def test_bad_modes(self):
        with pytest.raises(InputError):
            relaxed_sssp(path_graph(), SchedulerConfig(), duplicates="x")
        with pytest.raises(InputError):
            relaxed_sssp(path_graph(), SchedulerConfig(),
                         pop_convention="x")


class TestBucketStats:
    def test_uniform_weights_buckets_are_hop_counts(self):
        g = WeightedDigraph(4, [(0, 1, 7), (1, 2, 7), (0, 3, 7)])
        dist, _ = relaxed_sssp(g, SchedulerConfig())
        stats = bucket_stats(dist, g)
        assert stats.w_min == 7
        for v, d in enumerate(dist):
            assert int(d) // 7 == {0: 0, 1: 1, 2: 2, 3: 1}[v]

    def test_path_graph_bucket_sizes(self):
        dist, _ = relaxed_sssp(path_graph(), SchedulerConfig())
        stats = bucket_stats(dist, path_graph())
        assert stats.bucket_sizes == [1, 1, 1]
        assert sum(stats.bucket_sizes) == stats.reachable

    def test_sampled_paths_never_repeat_a_bucket(self):
        g = generate_random_graph(400, 1600, 9)
        dist = dijkstra_oracle(g)
        stats = bucket_stats(dist, g, sample_size=100, rng_seed=1)
        assert sum(stats.bucket_sizes) == stats.reachable


class TestGraphIO:
    def test_dimacs_example(self, tmp_path):
        path = tmp_path / "g.gr"
        path.write_text("c comment\np sp 3 2\na 1 2 5\na 2 3 7\n")
        g = load_graph(path, "dimacs-gr")
        assert g.n == 3
        assert sorted(g.edge_list()) == [(0, 1, 5), (1, 2, 7)]

    def test_tsv_example(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("0\t1\t5\n")
        g = load_graph(path, "tsv")
        assert list(g.edge_list()) == [(0, 1, 5)]

    def test_out_of_range_vertex_names_line(self, tmp_path):
        path = tmp_path / "g.gr"
        path.write_text("p sp 3 1\na 1 4 2\n")
        with pytest.raises(ParseError) as exc:
            load_graph(path, "dimacs-gr")
        assert exc.value.line == 2

    def test_header_arc_count_mismatch(self, tmp_path):
        path = tmp_path / "g.gr"
        path.write_text("p sp 3 2\na 1 2 5\n")
        with pytest.raises(ParseError):
            load_graph(path, "dimacs-gr")

    def test_nonpositive_weight_rejected(self, tmp_path):
        path = tmp_path / "g.gr"
        path.write_text("p sp 2 1\na 1 2 0\n")
        with pytest.raises(ParseError):
            load_graph(path, "dimacs-gr")
        with pytest.raises(InputError):
            WeightedDigraph(2, [(0, 1, -3)])

    def test_dimacs_round_trip(self, tmp_path):
        g = generate_random_graph(50, 200, 12)
        path = tmp_path / "g.gr"
        write_dimacs(g, path)
        again = load_graph(path, "dimacs-gr")
        assert sorted(again.edge_list()) == sorted(g.edge_list())

    def test_generator_determinism_and_bounds(self):
        a = generate_random_graph(200, 800, 3)
        b = generate_random_graph(200, 800, 3)
        assert sorted(a.edge_list()) == sorted(b.edge_list())
        assert a.m == 1600     # symmetric digraph: 2 arcs per edge
        assert 1 <= a.min_weight() and int(a.weights.max()) <= 100
        with pytest.raises(InputError):
            generate_random_graph(4, 100, 0)
