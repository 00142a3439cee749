from __future__ import annotations

import io
import math

import numpy as np
import pytest

from biroute import (
    BiGraph,
    CostVec,
    Eps,
    generate_synthetic,
    load_artifact,
    load_dimacs_pair,
    load_graph,
    normalize_costs,
    perp_distance,
    save_artifact,
    save_graph,
)
from biroute.graph_io import (
    ArtifactError,
    ClusterRecord,
    FormatError,
    PreprocArtifact,
    SuperEdgeRecord,
    SyntheticSpec,
    graph_fingerprint,
)


def gr(n: int, arcs: list[tuple[int, int, float]], comments: list[str] | None = None) -> str:
    lines = list(comments or ["c generated for tests"])
    lines.append(f"p sp {n} {len(arcs)}")
    for u, v, w in arcs:
        lines.append(f"a {u} {v} {w:g}")
    return "\n".join(lines) + "\n"


class TestDimacsLoader:
    def test_positional_zip(self):
        f1 = gr(3, [(1, 2, 1), (2, 3, 2), (3, 1, 3)])
        f2 = gr(3, [(1, 2, 10), (2, 3, 20), (3, 1, 30)])
        g = load_dimacs_pair(io.StringIO(f1), io.StringIO(f2))
        assert g.vertex_count == 3 and g.edge_count == 3
        assert [g.cost(k).as_tuple() for k in range(3)] == [
            (1.0, 10.0),
            (2.0, 20.0),
            (3.0, 30.0),
        ]

    def test_header_mismatch(self):
        f1 = gr(3, [(1, 2, 1)])
        f2 = gr(4, [(1, 2, 1)])
        with pytest.raises(FormatError, match="header mismatch"):
            load_dimacs_pair(io.StringIO(f1), io.StringIO(f2))

    def test_endpoint_mismatch_reports_arc_index(self):
        f1 = gr(3, [(1, 2, 1), (2, 3, 2)])
        f2 = gr(3, [(1, 2, 1), (3, 2, 2)])
        with pytest.raises(FormatError, match="arc 1"):
            load_dimacs_pair(io.StringIO(f1), io.StringIO(f2))

    def test_out_of_range_vertex(self):
        f1 = gr(2, [(1, 5, 1)])
        with pytest.raises(FormatError, match="out of range"):
            load_dimacs_pair(io.StringIO(f1), io.StringIO(f1))

    def test_negative_weight(self):
        text = "p sp 2 1\na 1 2 -4\n"
        with pytest.raises(FormatError, match="negative"):
            load_dimacs_pair(io.StringIO(text), io.StringIO(text))

    def test_comment_permutation_is_irrelevant(self):
        arcs = [(1, 2, 5), (2, 1, 7)]
        a = gr(2, arcs, comments=["c one", "c two"])
        b = "c two\n" + gr(2, arcs, comments=["c one"])
        ga = load_dimacs_pair(io.StringIO(a), io.StringIO(a))
        gb = load_dimacs_pair(io.StringIO(b), io.StringIO(b))
        assert list(ga.edges()) == list(gb.edges())

    def test_arc_count_must_match_header(self):
        text = "p sp 2 2\na 1 2 4\n"
        with pytest.raises(FormatError, match="declares 2 arcs"):
            load_dimacs_pair(io.StringIO(text), io.StringIO(text))


class TestNormalize:
    def test_divides_by_maxima(self):
        g = BiGraph.from_edges(2, [(0, 1, 2, 10), (1, 0, 4, 20)])
        norm, scales = normalize_costs(g)
        assert (scales.max_c1, scales.max_c2) == (4.0, 20.0)
        assert [c.as_tuple() for c in (norm.cost(0), norm.cost(1))] == [
            (0.5, 0.5),
            (1.0, 1.0),
        ]

    def test_single_edge_maps_to_unit(self):
        g = BiGraph.from_edges(2, [(0, 1, 7, 3)])
        norm, _ = normalize_costs(g)
        assert norm.cost(0).as_tuple() == (1.0, 1.0)

    def test_idempotent(self):
        g = BiGraph.from_edges(2, [(0, 1, 2, 10), (1, 0, 4, 20)])
        norm, _ = normalize_costs(g)
        norm2, scales2 = normalize_costs(norm)
        assert (scales2.max_c1, scales2.max_c2) == (1.0, 1.0)
        assert list(norm2.c1) == list(norm.c1)

    def test_all_zero_column_rejected(self):
        g = BiGraph.from_edges(2, [(0, 1, 0, 1)])
        with pytest.raises(ValueError, match="all-zero"):
            normalize_costs(g)


class TestSynthetic:
    def test_zero_noise_sits_exactly_on_lines(self):
        g, truth = generate_synthetic(
            SyntheticSpec(n_vertices=64, n_lines=1, delta_plant=0.0, rng_seed=0)
        )
        norm, _ = normalize_costs(g)
        for e in range(norm.edge_count):
            assert perp_distance(truth.lines[0], norm.cost(e)) <= 1e-12

    def test_three_line_grid_conforms(self):
        g, truth = generate_synthetic(
            SyntheticSpec(n_vertices=2500, n_lines=3, delta_plant=0.02, rng_seed=1)
        )
        norm, _ = normalize_costs(g)
        for e in range(norm.edge_count):
            line = truth.lines[truth.edge_line[e]]
            assert perp_distance(line, norm.cost(e)) <= 0.02

    def test_deterministic(self):
        spec = SyntheticSpec(n_vertices=100, n_lines=2, delta_plant=0.01, rng_seed=9)
        g1, t1 = generate_synthetic(spec)
        g2, t2 = generate_synthetic(spec)
        assert np.array_equal(g1.c1, g2.c1) and np.array_equal(g1.c2, g2.c2)
        assert t1 == t2
        buf1, buf2 = io.StringIO(), io.StringIO()
        save_graph(g1, buf1)
        save_graph(g2, buf2)
        assert buf1.getvalue() == buf2.getvalue()

    def test_more_regions_than_vertices_is_infeasible(self):
        with pytest.raises(ValueError, match="regions"):
            generate_synthetic(SyntheticSpec(n_vertices=2, n_lines=5, rng_seed=0))

    def test_random_regular_topology(self):
        g, truth = generate_synthetic(
            SyntheticSpec(
                n_vertices=60, topology="random-regular", n_lines=2, rng_seed=3
            )
        )
        norm, _ = normalize_costs(g)
        degrees = [len(g.out_edges[v]) for v in range(g.vertex_count)]
        assert all(d == 4 for d in degrees)
        for e in range(norm.edge_count):
            line = truth.lines[truth.edge_line[e]]
            assert perp_distance(line, norm.cost(e)) <= 0.02

    def test_costs_are_dyadic_for_exact_sums(self):
        g, _ = generate_synthetic(
            SyntheticSpec(n_vertices=64, n_lines=2, delta_plant=0.02, rng_seed=5)
        )
        q = 2.0**-20
        assert np.all(np.round(g.c1 / q) * q == g.c1)
        assert np.all(np.round(g.c2 / q) * q == g.c2)


class TestGraphFile:
    def test_round_trip(self, tmp_path):
        g, _ = generate_synthetic(SyntheticSpec(n_vertices=36, n_lines=1, rng_seed=2))
        path = tmp_path / "g.json"
        save_graph(g, path)
        g2 = load_graph(path)
        assert g2.vertex_count == g.vertex_count
        assert np.array_equal(g2.c1, g.c1) and np.array_equal(g2.src, g.src)

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(FormatError):
            load_graph(p)


def example_artifact(with_paths: bool = True) -> PreprocArtifact:
    eps = Eps(0.1, 0.1)
    g = BiGraph.from_edges(2, [(0, 1, 1, 1)])
    return PreprocArtifact(
        delta=0.05,
        eps=eps,
        n_vertices=6,
        fingerprint="test-fp",
        clusters=(
            ClusterRecord(
                id=0,
                line_a=-0.005,
                line_b=-0.005,
                vertices=(1, 2, 3, 4),
                boundary=(1, 4),
            ),
        ),
        super_edges=(
            SuperEdgeRecord(0, 1, 4, CostVec(20, 100), CostVec(20, 100),
                            (1, 4) if with_paths else None),
            SuperEdgeRecord(0, 1, 4, CostVec(80, 30), CostVec(80, 28),
                            (1, 2, 3, 4) if with_paths else None),
        ),
    )


class TestArtifact:
    def test_empty_round_trip(self):
        a = PreprocArtifact(
            delta=0.01,
            eps=Eps(0, 0),
            n_vertices=3,
            fingerprint="x",
            clusters=(),
            super_edges=(),
        )
        buf = io.StringIO()
        save_artifact(a, buf)
        assert load_artifact(io.StringIO(buf.getvalue())) == a

    def test_golden_round_trip(self):
        a = example_artifact()
        buf = io.StringIO()
        save_artifact(a, buf)
        b = load_artifact(io.StringIO(buf.getvalue()))
        assert b == a
        assert b.super_edges[1].rep_path == (1, 2, 3, 4)

    def test_truncated_stream(self):
        buf = io.StringIO()
        save_artifact(example_artifact(), buf)
        with pytest.raises(ArtifactError):
            load_artifact(io.StringIO(buf.getvalue()[: len(buf.getvalue()) // 2]))

    def test_version_mismatch(self):
        buf = io.StringIO()
        save_artifact(example_artifact(), buf)
        text = buf.getvalue().replace('"version":1', '"version":99')
        with pytest.raises(ArtifactError, match="version"):
            load_artifact(io.StringIO(text))

    def test_invariant_violation_on_load(self):
        # Break eps-boundedness: c way above (1+eps)*c_apex.
        buf = io.StringIO()
        save_artifact(example_artifact(), buf)
        text = buf.getvalue().replace("[80.0,30.0]", "[80.0,333.0]")
        with pytest.raises(ArtifactError, match="eps-bounded"):
            load_artifact(io.StringIO(text))

    def test_overlapping_clusters_rejected(self):
        a = example_artifact()
        bad = PreprocArtifact(
            delta=a.delta,
            eps=a.eps,
            n_vertices=a.n_vertices,
            fingerprint=a.fingerprint,
            clusters=a.clusters + a.clusters,
            super_edges=(),
        )
        with pytest.raises(ArtifactError, match="overlap"):
            save_artifact(bad, io.StringIO())

    def test_cluster_set_reconstruction_fills_trivial(self):
        cs = example_artifact().cluster_set()
        assert len(cs.nontrivial()) == 1
        assert sorted(v for c in cs.clusters for v in c.vertices) == list(range(6))
        trivial_ids = {0, 5}
        for v in trivial_ids:
            assert cs.clusters[int(cs.cluster_of[v])].is_trivial

    def test_fingerprint_sensitive_to_costs_and_params(self):
        g1 = BiGraph.from_edges(2, [(0, 1, 1, 1)])
        g2 = BiGraph.from_edges(2, [(0, 1, 1, 2)])
        e = Eps(0.1, 0.1)
        assert graph_fingerprint(g1, 0.05, e) != graph_fingerprint(g2, 0.05, e)
        assert graph_fingerprint(g1, 0.05, e) != graph_fingerprint(g1, 0.06, e)
        assert graph_fingerprint(g1, 0.05, e) == graph_fingerprint(g1, 0.05, Eps(0.1, 0.1))
