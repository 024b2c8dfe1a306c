import math
import random

import pytest

from ldcnet import (
    PageRankParams,
    WeightedDigraph,
    betweenness,
    build_context,
    closeness,
    compute_all,
    degree,
    ldc,
    ldc_vector,
    pagerank,
    triangles,
)
from ldcnet.errors import EmptyGraph, NoConvergence, UnknownVertex

import oracles
from corpora import complete_graph, random_graph, scale_weights


def detour_toy(detour_cost):
    """Route B->A->C at unit cost plus a two-arc detour B->D->C."""
    return WeightedDigraph(
        [
            ("B", "A", 1.0),
            ("A", "C", 1.0),
            ("B", "D", detour_cost),
            ("D", "C", detour_cost),
        ]
    )


class TestBuildContext:
    def test_toy_detour_matrices_match_hand_dijkstra(self):
        # D has no arc to or from A, so only B and C are A's neighbors.
        g = detour_toy(3.0)
        ctx = build_context(g, "A", r=10.0)
        assert ctx.members == ("B", "C")
        assert ctx.max_weight == 3.0
        b, c = 0, 1
        assert ctx.with_matrix[b][c] == 2.0
        # inflating A's arcs to 3 makes B->A->C cost 6, same as the detour
        assert ctx.without_matrix[b][c] == 6.0
        assert ctx.with_matrix[c][b] is None
        assert ctx.without_matrix[c][b] is None

    def test_member_distances_may_route_outside_the_neighborhood(self):
        # B->D->C stays available when computing distances among {B, C}.
        g = detour_toy(1.5)
        ctx = build_context(g, "A", r=10.0)
        assert ctx.members == ("B", "C")
        assert ctx.without_matrix[0][1] == 3.0  # detour beats the inflated route

    def test_empty_neighborhood_gives_empty_matrices(self):
        g = WeightedDigraph([("a", "b", 5.0)], vertices=["lone"])
        ctx = build_context(g, "lone", r=0.5)
        assert ctx.members == ()
        assert ctx.with_matrix == ()
        assert ctx.without_matrix == ()

    def test_unknown_vertex(self):
        with pytest.raises(UnknownVertex):
            build_context(detour_toy(3.0), "Z", r=1.0)

    def test_without_matrix_matches_reweighted_apsp_oracle(self):
        rng = random.Random(17)
        for _ in range(20):
            g = random_graph(rng, 10, p=0.3)
            if g.arc_count == 0:
                continue
            r = rng.uniform(0.5, 4.0)
            max_w = g.max_arc_weight
            for v in g.vertices:
                ctx = build_context(g, v, r)
                reweighted = [
                    (a, b, max_w if v in (a, b) else w) for a, b, w in g.arcs()
                ]
                fw = oracles.fw_distances_from_arcs(g.vertices, reweighted)
                for i, u in enumerate(ctx.members):
                    for j, t in enumerate(ctx.members):
                        expected = fw[(u, t)]
                        got = ctx.without_matrix[i][j]
                        if expected == math.inf:
                            assert got is None
                        else:
                            assert got == pytest.approx(expected, abs=1e-12)

    def test_with_never_exceeds_without(self):
        rng = random.Random(23)
        for _ in range(15):
            g = random_graph(rng, 8, p=0.4)
            if g.vertex_count < 2 or g.arc_count == 0:
                continue
            r = g.mean_pairwise_distance()
            for v in g.vertices:
                ctx = build_context(g, v, r)
                for wr, wor in zip(ctx.with_matrix, ctx.without_matrix):
                    for a, b in zip(wr, wor):
                        if a is not None and b is not None:
                            assert a <= b + 1e-12


class TestLdc:
    def test_complete_uniform_digraph_scores_zero(self):
        g = complete_graph(5)
        for v in g.vertices:
            assert ldc(g, v) == 0.0

    def test_cheap_detour_scores_below_expensive_detour(self):
        cheap = ldc(detour_toy(1.5), "A")
        expensive = ldc(detour_toy(3.0), "A")
        assert cheap < expensive

    def test_matches_matrix_materialization_oracle(self):
        rng = random.Random(31)
        checked = 0
        for _ in range(40):
            g = random_graph(rng, rng.randint(5, 9), p=0.4)
            if g.vertex_count < 2 or g.arc_count == 0:
                continue
            r = g.mean_pairwise_distance()
            for v in g.vertices:
                assert ldc(g, v, r) == pytest.approx(
                    oracles.brute_ldc(g, v, r), abs=1e-10
                )
                checked += 1
        assert checked > 100

    def test_nonnegative(self):
        rng = random.Random(37)
        for _ in range(20):
            g = random_graph(rng, 8, p=0.35)
            if g.vertex_count < 2:
                continue
            r = g.mean_pairwise_distance()
            assert all(s >= 0.0 for s in ldc_vector(g, r).scores.values())

    def test_weight_scaling_scales_scores_linearly(self):
        rng = random.Random(41)
        g = random_graph(rng, 8, p=0.5)
        base = ldc_vector(g).scores
        for factor in (0.1, 3.0, 10.0):
            scaled = ldc_vector(scale_weights(g, factor)).scores
            for v, s in base.items():
                assert scaled[v] == pytest.approx(factor * s, rel=1e-9, abs=1e-12)
            order = sorted(base, key=lambda v: (base[v], v))
            scaled_order = sorted(scaled, key=lambda v: (scaled[v], v))
            assert order == scaled_order

    def test_parallel_matches_sequential_bitwise(self):
        rng = random.Random(43)
        g = random_graph(rng, 9, p=0.5)
        sequential = ldc_vector(g, jobs=1).scores
        parallel = ldc_vector(g, jobs=2).scores
        assert sequential == parallel

    def test_empty_neighborhood_scores_zero(self):
        g = WeightedDigraph([("a", "b", 1.0)], vertices=["lone"])
        assert ldc(g, "lone") == 0.0


class TestDegree:
    def test_star(self):
        g = WeightedDigraph([("c", f"x{i}", 1.0) for i in range(4)])
        assert degree(g, "out").scores["c"] == 4
        assert degree(g, "in").scores["c"] == 0
        assert degree(g, "in").scores["x0"] == 1

    def test_empty_graph_all_zero(self):
        g = WeightedDigraph(vertices=["a", "b", "c"])
        assert set(degree(g, "out").scores.values()) == {0.0}
        assert set(degree(g, "in").scores.values()) == {0.0}

    def test_matches_adjacency_counts(self):
        rng = random.Random(47)
        g = random_graph(rng, 10, p=0.4)
        arcs = list(g.arcs())
        for v in g.vertices:
            assert degree(g, "out").scores[v] == sum(1 for u, _, _ in arcs if u == v)
            assert degree(g, "in").scores[v] == sum(1 for _, t, _ in arcs if t == v)

    def test_rejects_unknown_direction(self):
        with pytest.raises(ValueError):
            degree(complete_graph(3), "sideways")


class TestCloseness:
    def test_complete_unit_digraph_all_one(self):
        for n in (3, 5):
            scores = closeness(complete_graph(n)).scores
            assert all(s == pytest.approx(1.0) for s in scores.values())

    def test_chain_start(self):
        g = WeightedDigraph([("a", "b", 1.0), ("b", "c", 1.0)])
        assert closeness(g).scores["a"] == pytest.approx(2 / 3)
        assert closeness(g).scores["c"] == 0.0

    def test_requires_two_vertices(self):
        with pytest.raises(EmptyGraph):
            closeness(WeightedDigraph(vertices=["a"]))

    def test_matches_ratio_oracle(self):
        rng = random.Random(53)
        for _ in range(20):
            g = random_graph(rng, 8, p=0.5)
            expected = oracles.brute_closeness(g)
            got = closeness(g).scores
            for v in g.vertices:
                assert got[v] == pytest.approx(expected[v], rel=1e-12, abs=1e-12)

    def test_scales_inversely_with_weights(self):
        rng = random.Random(59)
        g = random_graph(rng, 8, p=0.6)
        base = closeness(g).scores
        tripled = closeness(scale_weights(g, 3.0)).scores
        for v in g.vertices:
            assert tripled[v] == pytest.approx(base[v] / 3.0, rel=1e-12)


class TestTriangles:
    def test_directed_three_cycle(self):
        g = WeightedDigraph([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
        assert all(s == 1.0 for s in triangles(g).scores.values())

    def test_tree_has_none(self):
        g = WeightedDigraph([("r", "a", 1.0), ("r", "b", 1.0), ("a", "c", 1.0)])
        assert all(s == 0.0 for s in triangles(g).scores.values())

    def test_matches_triple_enumeration(self):
        rng = random.Random(61)
        for _ in range(20):
            g = random_graph(rng, 9, p=0.4)
            assert triangles(g).scores == oracles.brute_triangles(g)

    def test_invariant_under_weight_scaling(self):
        rng = random.Random(67)
        g = random_graph(rng, 8, p=0.5)
        assert triangles(g).scores == triangles(scale_weights(g, 7.0)).scores


class TestPagerank:
    def test_directed_ring_is_uniform(self):
        for n in (3, 6):
            names = [f"w{i:02d}" for i in range(n)]
            g = WeightedDigraph(
                [(names[i], names[(i + 1) % n], 1.0) for i in range(n)]
            )
            scores = pagerank(g).scores
            assert all(s == pytest.approx(1 / n, abs=1e-9) for s in scores.values())

    def test_single_vertex(self):
        g = WeightedDigraph(vertices=["only"])
        assert pagerank(g).scores["only"] == pytest.approx(1.0)

    def test_scores_sum_to_one(self):
        rng = random.Random(71)
        for _ in range(10):
            g = random_graph(rng, 12, p=0.3)
            assert sum(pagerank(g).scores.values()) == pytest.approx(1.0, abs=1e-8)

    def test_residual_of_normalized_update_is_tiny(self):
        rng = random.Random(73)
        for _ in range(20):
            g = random_graph(rng, rng.randint(3, 20), p=0.3)
            scores = pagerank(g).scores
            assert oracles.pagerank_residual(g, scores, 0.85) < 1e-8

    def test_no_convergence_raises(self):
        g = WeightedDigraph([("a", "b", 1.0), ("b", "c", 1.0)])
        with pytest.raises(NoConvergence):
            pagerank(g, PageRankParams(max_iterations=1))


class TestBetweenness:
    def test_chain_middle(self):
        g = WeightedDigraph([("a", "b", 1.0), ("b", "c", 1.0)])
        scores = betweenness(g).scores
        assert scores == {"a": 0.0, "b": 1.0, "c": 0.0}

    def test_complete_unit_digraph_all_zero(self):
        for n in (4, 6):
            assert set(betweenness(complete_graph(n)).scores.values()) == {0.0}

    def test_requires_three_vertices(self):
        with pytest.raises(EmptyGraph):
            betweenness(WeightedDigraph([("a", "b", 1.0)]))

    def test_matches_path_enumeration_oracle(self):
        rng = random.Random(79)
        for _ in range(25):
            g = random_graph(rng, 8, p=0.4, weights="dyadic")
            expected = oracles.brute_betweenness(g)
            got = betweenness(g).scores
            for v in g.vertices:
                assert got[v] == pytest.approx(expected[v], abs=1e-9)

    def test_invariant_under_weight_scaling(self):
        rng = random.Random(83)
        g = random_graph(rng, 8, p=0.5, weights="dyadic")
        base = betweenness(g).scores
        scaled = betweenness(scale_weights(g, 4.0)).scores
        for v in g.vertices:
            assert scaled[v] == pytest.approx(base[v], abs=1e-9)


class TestComputeAll:
    def test_chain_composition(self):
        g = WeightedDigraph([("a", "b", 1.0), ("b", "c", 1.0)])
        table = compute_all(g)
        assert table["betweenness"].scores["b"] == 1.0
        assert table["out_degree"].scores["a"] == 1.0
        assert set(table["triangles"].scores.values()) == {0.0}

    def test_empty_vertex_set_raises(self):
        with pytest.raises(EmptyGraph):
            compute_all(WeightedDigraph())

    def test_columns_match_individual_operations(self):
        rng = random.Random(89)
        g = random_graph(rng, 9, p=0.5)
        table = compute_all(g)
        r = g.mean_pairwise_distance()
        assert table["ldc"].scores == ldc_vector(g, r).scores
        assert table["in_degree"].scores == degree(g, "in").scores
        assert table["out_degree"].scores == degree(g, "out").scores
        assert table["closeness"].scores == closeness(g).scores
        assert table["triangles"].scores == triangles(g).scores
        assert table["pagerank"].scores == pagerank(g).scores
        assert table["betweenness"].scores == betweenness(g).scores
