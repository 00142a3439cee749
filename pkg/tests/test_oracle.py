from __future__ import annotations

import math
import random

import pytest

from biroute import BiGraph, dijkstra, exact_pareto, extreme_pair
from _support import bellman_ford, brute_force_frontier, random_bigraph


def golden_cluster() -> BiGraph:
    """Four vertices, three mutually undominated 0->3 paths:
    (20,100), (80,30) and (90,28)."""
    return BiGraph.from_edges(
        4,
        [
            (0, 3, 20, 100),
            (0, 1, 30, 10),
            (1, 2, 20, 10),
            (2, 3, 30, 10),
            (0, 2, 60, 18),
        ],
    )


class TestDijkstra:
    def test_single_vertex(self):
        g = BiGraph.from_edges(1, [])
        d = dijkstra(g, 0)
        assert d[0] == 0.0

    def test_chain(self):
        g = BiGraph.from_edges(3, [(0, 1, 2, 9), (1, 2, 3, 9)])
        assert list(dijkstra(g, 0, objective=1)) == [0.0, 2.0, 5.0]

    def test_reverse_uses_transposed_edges(self):
        g = BiGraph.from_edges(3, [(0, 1, 2, 9), (1, 2, 3, 9)])
        assert list(dijkstra(g, 2, objective=1, direction="reverse")) == [5.0, 3.0, 0.0]

    def test_unreachable_is_inf(self):
        g = BiGraph.from_edges(2, [])
        assert math.isinf(dijkstra(g, 0)[1])

    def test_matches_bellman_ford(self):
        rng = random.Random(7)
        for _ in range(50):
            g, s, _ = random_bigraph(rng, max_vertices=50, max_edges=150)
            for obj in (1, 2):
                d = dijkstra(g, s, objective=obj)
                bf = bellman_ford(g, s, obj)
                assert list(d) == bf

    def test_restriction(self):
        g = BiGraph.from_edges(3, [(0, 1, 1, 1), (1, 2, 1, 1), (0, 2, 9, 9)])
        d = dijkstra(g, 0, restrict_to={0, 2})
        assert d[2] == 9.0 and math.isinf(d[1])

    def test_reverse_distances_are_consistent_heuristics(self):
        rng = random.Random(21)
        for _ in range(20):
            g, _, t = random_bigraph(rng, max_vertices=30, max_edges=90)
            for obj in (1, 2):
                h = dijkstra(g, t, objective=obj, direction="reverse")
                w = g.c1 if obj == 1 else g.c2
                for eid in range(g.edge_count):
                    u, v = int(g.src[eid]), int(g.dst[eid])
                    assert h[u] <= w[eid] + h[v] + 1e-9


class TestExactPareto:
    def test_golden_cluster_frontier(self):
        fr = exact_pareto(golden_cluster(), 0, 3)
        assert [c.as_tuple() for c in fr.costs()] == [
            (20.0, 100.0),
            (80.0, 30.0),
            (90.0, 28.0),
        ]

    def test_source_equals_target(self):
        fr = exact_pareto(golden_cluster(), 1, 1)
        assert len(fr) == 1
        assert fr.paths[0].cost.as_tuple() == (0.0, 0.0)
        assert fr.paths[0].path == (1,)

    def test_unreachable_gives_empty_frontier(self):
        g = BiGraph.from_edges(2, [(1, 0, 1, 1)])
        assert len(exact_pareto(g, 0, 1)) == 0

    def test_matches_brute_force_enumeration(self):
        rng = random.Random(11)
        for _ in range(60):
            g, s, t = random_bigraph(rng)
            fr = exact_pareto(g, s, t)
            assert [c.as_tuple() for c in fr.costs()] == brute_force_frontier(g, s, t)

    def test_frontier_sorted_and_undominated(self):
        rng = random.Random(13)
        for _ in range(30):
            g, s, t = random_bigraph(rng, max_vertices=20, max_edges=60)
            fr = exact_pareto(g, s, t)
            cs = [c.as_tuple() for c in fr.costs()]
            assert cs == sorted(cs)
            for i in range(1, len(cs)):
                assert cs[i][0] > cs[i - 1][0]
                assert cs[i][1] < cs[i - 1][1]

    def test_witness_paths_have_their_costs(self):
        # Parallel-edge-free graphs so a vertex sequence has a unique cost.
        rng = random.Random(17)
        for _ in range(20):
            g0, s, t = random_bigraph(rng)
            seen: dict[tuple[int, int], tuple[float, float]] = {}
            for u, v, a, b in g0.edges():
                seen.setdefault((u, v), (a, b))
            g = BiGraph.from_edges(
                g0.vertex_count, [(u, v, a, b) for (u, v), (a, b) in seen.items()]
            )
            for pw in exact_pareto(g, s, t).paths:
                c1 = c2 = 0.0
                for u, v in zip(pw.path, pw.path[1:]):
                    c1 += seen[(u, v)][0]
                    c2 += seen[(u, v)][1]
                assert (c1, c2) == pw.cost.as_tuple()

    def test_restriction_matches_restricted_brute_force(self):
        rng = random.Random(19)
        for _ in range(30):
            g, s, t = random_bigraph(rng)
            allowed = {s, t} | {
                v for v in range(g.vertex_count) if rng.random() < 0.7
            }
            fr = exact_pareto(g, s, t, restrict_to=allowed)
            assert [c.as_tuple() for c in fr.costs()] == brute_force_frontier(
                g, s, t, restrict=allowed
            )


class TestExtremePair:
    def test_single_best_path_for_both_objectives(self):
        g = BiGraph.from_edges(3, [(0, 1, 1, 1), (1, 2, 1, 1), (0, 2, 5, 5)])
        ext = extreme_pair(g, 0, 2)
        assert ext.obj1.cost == ext.obj2.cost
        assert ext.obj1.path == (0, 1, 2)

    def test_golden_cluster_corners(self):
        ext = extreme_pair(golden_cluster(), 0, 3)
        assert ext.obj1.cost.as_tuple() == (20.0, 100.0)
        assert ext.obj2.cost.as_tuple() == (90.0, 28.0)

    def test_unreachable(self):
        g = BiGraph.from_edges(2, [(1, 0, 1, 1)])
        assert extreme_pair(g, 0, 1) is None

    def test_corners_bound_brute_force_frontier(self):
        rng = random.Random(23)
        for _ in range(40):
            g, s, t = random_bigraph(rng)
            front = brute_force_frontier(g, s, t)
            ext = extreme_pair(g, s, t)
            if not front:
                assert ext is None
                continue
            c1_min = min(c[0] for c in front)
            c2_min = min(c[1] for c in front)
            assert ext.obj1.cost.c1 == c1_min
            assert ext.obj2.cost.c2 == c2_min
            # Lexicographic tie-break gives the true frontier corners.
            assert ext.obj1.cost.as_tuple() == front[0]
            assert ext.obj2.cost.as_tuple() == front[-1]
            for c in front:
                assert c1_min <= c[0] <= ext.obj2.cost.c1
                assert c2_min <= c[1] <= ext.obj1.cost.c2
