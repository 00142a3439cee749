"""Per-query graph assembly and the end-to-end solve API.

A query graph keeps the two terminal clusters intact and replaces every
other non-trivial cluster's interior with its precomputed super-edges.
Since the construction depends only on the pair of terminal clusters,
built graphs are cached per (cluster_s, cluster_t).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .core import CostVec, Eps
from .apex_search import (
    GenGraph,
    SearchStats,
    SolutionSet,
    reconstruct_path,
    search,
)
from .clustering import ClusterSet
from .graph_io import ArtifactError, BiGraph, PreprocArtifact, graph_fingerprint

__all__ = ["QueryGraph", "QueryGraphCache", "SolveResult", "build_query_graph", "solve"]


@dataclass(frozen=True)
class QueryGraph:
    """Generalized graph for one terminal-cluster pair, with id remaps."""

    gen: GenGraph
    to_compact: dict[int, int]
    labels: np.ndarray  # compact -> original vertex id
    psi_s: int
    psi_t: int
    n_super: int

    @property
    def vertex_count(self) -> int:
        return self.gen.vertex_count

    @property
    def edge_count(self) -> int:
        return self.gen.edge_count


class QueryGraphCache:
    """Thread-safe memo of query graphs keyed by terminal-cluster pair."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._store: dict[tuple[int, int], QueryGraph] = {}

    def get(self, key: tuple[int, int]) -> QueryGraph | None:
        with self._lock:
            return self._store.get(key)

    def put(self, key: tuple[int, int], qg: QueryGraph) -> None:
        with self._lock:
            self._store[key] = qg

    def __len__(self) -> int:
        return len(self._store)


def _check_artifact(g: BiGraph, artifact: PreprocArtifact) -> None:
    if artifact.n_vertices != g.vertex_count:
        raise ArtifactError(
            f"artifact built for {artifact.n_vertices} vertices, graph has {g.vertex_count}"
        )
    expect = graph_fingerprint(g, artifact.delta, artifact.eps)
    if artifact.fingerprint != expect:
        raise ArtifactError("artifact fingerprint does not match graph/parameters")


def build_query_graph(
    g: BiGraph,
    clusters: ClusterSet,
    artifact: PreprocArtifact,
    s: int,
    t: int,
) -> QueryGraph:
    """Assemble the generalized query graph for terminals `s`, `t`.

    Keeps all vertices of the two terminal clusters plus the boundary
    vertices of every other cluster; drops interior edges of non-terminal
    clusters and adds their super-edges instead.  Regular edges carry
    c_apex = c; super-edges carry their stored (c, c_apex).
    """
    _check_artifact(g, artifact)
    for name, v in (("source", s), ("target", t)):
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"{name} {v} out of range")
    cl_of = clusters.cluster_of
    psi_s, psi_t = int(cl_of[s]), int(cl_of[t])
    terminal = {psi_s, psi_t}

    keep = np.zeros(g.vertex_count, dtype=bool)
    for ci, c in enumerate(clusters.clusters):
        if ci in terminal or c.is_trivial:
            keep[list(c.vertices)] = True
        else:
            keep[list(c.boundary)] = True

    labels = np.flatnonzero(keep).astype(np.int64)
    to_compact = {int(v): i for i, v in enumerate(labels)}

    src: list[int] = []
    dst: list[int] = []
    c1: list[float] = []
    c2: list[float] = []
    a1: list[float] = []
    a2: list[float] = []
    is_super: list[bool] = []
    provenance: list[tuple[str, int]] = []

    trivial = np.array([c.is_trivial for c in clusters.clusters], dtype=bool)
    for eid in range(g.edge_count):
        u, v = int(g.src[eid]), int(g.dst[eid])
        cu, cv = int(cl_of[u]), int(cl_of[v])
        if cu == cv and cu not in terminal and not trivial[cu]:
            continue  # interior edge of a non-terminal cluster
        assert keep[u] and keep[v]
        src.append(to_compact[u])
        dst.append(to_compact[v])
        w1, w2 = float(g.c1[eid]), float(g.c2[eid])
        c1.append(w1)
        c2.append(w2)
        a1.append(w1)
        a2.append(w2)
        is_super.append(False)
        provenance.append(("edge", eid))

    n_super = 0
    for k, se in enumerate(artifact.super_edges):
        ci = int(cl_of[se.b_i])
        if ci in terminal:
            continue
        src.append(to_compact[se.b_i])
        dst.append(to_compact[se.b_j])
        c1.append(se.c.c1)
        c2.append(se.c.c2)
        a1.append(se.c_apex.c1)
        a2.append(se.c_apex.c2)
        is_super.append(True)
        provenance.append(("super", k))
        n_super += 1

    gen = GenGraph(
        len(labels),
        np.array(src, dtype=np.int64),
        np.array(dst, dtype=np.int64),
        np.array(c1),
        np.array(c2),
        np.array(a1),
        np.array(a2),
        np.array(is_super, dtype=bool),
        provenance=provenance,
        vertex_labels=labels,
    )
    return QueryGraph(
        gen=gen,
        to_compact=to_compact,
        labels=labels,
        psi_s=psi_s,
        psi_t=psi_t,
        n_super=n_super,
    )


@dataclass
class SolveResult:
    costs: list[CostVec]
    paths: list[list[int]] | None
    stats: SearchStats
    solution_set: SolutionSet
    query_graph: QueryGraph

    def expanded_original_vertices(self) -> list[int]:
        labels = self.query_graph.labels
        return [int(labels[v]) for v in self.stats.expanded_vertices]


def solve(
    g: BiGraph,
    clusters: ClusterSet,
    artifact: PreprocArtifact,
    s: int,
    t: int,
    eps: Eps,
    mode: str = "plain",
    cache: QueryGraphCache | None = None,
    with_paths: bool = True,
) -> SolveResult:
    """End-to-end approximate query over the preprocessed graph.

    `eps` must component-wise cover the artifact's eps (the super-edges
    only guarantee the factor they were built with).  Returned costs
    eps-dominate the original graph's Pareto frontier between s and t.
    """
    if not eps.covers(artifact.eps):
        raise ValueError(
            f"query eps {eps.as_tuple()} is below the artifact eps "
            f"{artifact.eps.as_tuple()}; super-edges only guarantee the artifact factor"
        )
    key_qg: QueryGraph | None = None
    if cache is not None:
        cl_of = clusters.cluster_of
        key = (int(cl_of[s]), int(cl_of[t]))
        key_qg = cache.get(key)
    if key_qg is None:
        key_qg = build_query_graph(g, clusters, artifact, s, t)
        if cache is not None:
            cache.put((key_qg.psi_s, key_qg.psi_t), key_qg)

    qg = key_qg
    sols, stats = search(qg.gen, qg.to_compact[s], qg.to_compact[t], eps, mode=mode)
    costs = sols.costs()
    paths = None
    if with_paths:
        paths = [reconstruct_path(p, qg.gen, artifact) for p in sols.pairs]
    return SolveResult(
        costs=costs, paths=paths, stats=stats, solution_set=sols, query_graph=qg
    )
