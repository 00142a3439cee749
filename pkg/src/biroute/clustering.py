"""Correlation-line detection and cluster delineation.

Works on a graph with normalized costs (each objective divided by its
maximum, so edge costs live in the unit square).  A RANSAC loop detects
distinct positively-sloped lines in objective space; a connected-components
pass then grows clusters of vertices whose incident edges all sit within
perpendicular distance delta of one detected line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .core import CostVec, Line2D, line_through

if TYPE_CHECKING:
    from .graph_io import BiGraph

__all__ = [
    "RansacParams",
    "Cluster",
    "ClusterSet",
    "pearson",
    "ransac_detect_lines",
    "conforming_lines",
    "delineate_clusters",
]


@dataclass(frozen=True)
class RansacParams:
    """Knobs for the multi-line detection loop.

    `n_min_inliers=None` resolves to 1% of the edge count (at least 2).
    """

    delta: float
    n_hypotheses: int = 100
    n_min_inliers: int | None = None
    max_rounds: int = 16
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.n_hypotheses < 1 or self.max_rounds < 1:
            raise ValueError("hypothesis and round counts must be >= 1")
        if self.n_min_inliers is not None and self.n_min_inliers < 1:
            raise ValueError("n_min_inliers must be >= 1")


@dataclass(frozen=True)
class Cluster:
    """A delta-correlated vertex group.

    Non-trivial clusters carry the line all their induced edges conform to,
    the induced edge set, and the boundary (members adjacent to outside
    vertices).  A trivial cluster is a single vertex with no edges whose
    boundary is itself.  `edges` is None for clusters restored from an
    artifact; it is recomputable as the induced edge set.
    """

    id: int
    vertices: frozenset[int]
    boundary: frozenset[int]
    is_trivial: bool
    line: Line2D | None = None
    edges: frozenset[int] | None = None

    def interior(self) -> frozenset[int]:
        return self.vertices - self.boundary


@dataclass
class ClusterSet:
    """Disjoint clusters covering every vertex (trivial fill included)."""

    clusters: list[Cluster]
    cluster_of: np.ndarray  # vertex -> cluster index

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for c in self.clusters:
            if seen & c.vertices:
                raise ValueError("cluster vertex sets are not disjoint")
            seen |= c.vertices
        if len(seen) != len(self.cluster_of):
            raise ValueError("clusters do not cover every vertex")

    def nontrivial(self) -> list[Cluster]:
        return [c for c in self.clusters if not c.is_trivial]

    @classmethod
    def from_nontrivial(
        cls, n_vertices: int, nontrivial: Sequence[Cluster]
    ) -> ClusterSet:
        """Rebuild a total cluster map from non-trivial clusters only."""
        cluster_of = np.full(n_vertices, -1, dtype=np.int64)
        clusters = list(nontrivial)
        for i, c in enumerate(clusters):
            cluster_of[list(c.vertices)] = i
        for v in range(n_vertices):
            if cluster_of[v] < 0:
                cluster_of[v] = len(clusters)
                clusters.append(
                    Cluster(
                        id=len(clusters),
                        vertices=frozenset((v,)),
                        boundary=frozenset((v,)),
                        is_trivial=True,
                    )
                )
        return cls(clusters=clusters, cluster_of=cluster_of)


def pearson(edge_costs: Sequence[CostVec]) -> float:
    """Pearson correlation of the two cost components across `edge_costs`."""
    if len(edge_costs) < 2:
        raise ValueError("need at least two samples")
    x = np.array([c.c1 for c in edge_costs])
    y = np.array([c.c2 for c in edge_costs])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("degenerate variance: correlation undefined")
    return float(np.corrcoef(x, y)[0, 1])


def _distances(a: float, b: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.abs(a * x + b * y + 1.0) / np.hypot(a, b)


def ransac_detect_lines(g: BiGraph, p: RansacParams) -> list[Line2D]:
    """Detect distinct positive-slope correlation lines, best-first.

    Each round fits `n_hypotheses` two-point lines on the remaining edges,
    scores them by inlier count at distance <= delta, keeps the best line
    exceeding `n_min_inliers`, and removes its inliers.  Stops when no
    candidate qualifies, fewer than 2 edges remain, or `max_rounds` is hit.
    """
    n_min = p.n_min_inliers
    if n_min is None:
        n_min = max(2, round(0.01 * g.edge_count))
    rng = np.random.default_rng(p.rng_seed)

    x = g.c1.astype(np.float64)
    y = g.c2.astype(np.float64)
    working = np.arange(g.edge_count)
    lines: list[Line2D] = []

    for _ in range(p.max_rounds):
        if len(working) < 2:
            break
        wx, wy = x[working], y[working]
        best_line: Line2D | None = None
        best_count = n_min  # candidate needs strictly more inliers
        best_mask: np.ndarray | None = None
        for _ in range(p.n_hypotheses):
            i, j = rng.choice(len(working), size=2, replace=False)
            pi = CostVec(float(wx[i]), float(wy[i]))
            pj = CostVec(float(wx[j]), float(wy[j]))
            if pi == pj:
                continue
            line = line_through(pi, pj)
            if line is None:
                continue
            mask = _distances(line.a, line.b, wx, wy) <= p.delta
            count = int(mask.sum())
            if count > best_count:
                best_line, best_count, best_mask = line, count, mask
        if best_line is None:
            break
        lines.append(best_line)
        working = working[~best_mask]
    return lines


def conforming_lines(
    cost: CostVec, lines: Sequence[Line2D], delta: float
) -> list[Line2D]:
    """All lines within perpendicular distance delta of `cost`."""
    return [
        ln
        for ln in lines
        if abs(ln.a * cost.c1 + ln.b * cost.c2 + 1.0) / np.hypot(ln.a, ln.b) <= delta
    ]


def delineate_clusters(
    g: BiGraph,
    lines: Sequence[Line2D],
    delta: float,
    n_min_vertices: int = 8,
    seed_order: Sequence[int] | None = None,
) -> ClusterSet:
    """Grow delta-correlated clusters by DFS over conforming vertices.

    A vertex is admissible for a cluster with line L iff every one of its
    incident edges (in and out) conforms to L and none of its neighbors is
    already claimed by a different cluster.  Seeds are taken in ascending
    vertex id (or `seed_order`); a seed opens a cluster on the first
    detected line all its incident edges conform to.  Grown clusters
    smaller than `n_min_vertices` dissolve into trivial clusters, as does
    every vertex left over.
    """
    n = g.vertex_count
    if seed_order is None:
        seed_order = range(n)

    # Precompute, per line, the set of edges conforming to it.
    conform = np.zeros((len(lines), g.edge_count), dtype=bool)
    for li, ln in enumerate(lines):
        conform[li] = _distances(ln.a, ln.b, g.c1, g.c2) <= delta

    incident: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        incident[v] = list(g.out_edges[v]) + list(g.in_edges[v])

    claimed = np.full(n, -1, dtype=np.int64)  # vertex -> provisional cluster idx
    grown: list[tuple[Line2D, list[int]]] = []

    def vertex_conforms(v: int, li: int) -> bool:
        return all(conform[li][eid] for eid in incident[v])

    def neighbor_claim_blocks(v: int, me: int) -> bool:
        for eid in incident[v]:
            other = int(g.dst[eid]) if int(g.src[eid]) == v else int(g.src[eid])
            if claimed[other] >= 0 and claimed[other] != me:
                return True
        return False

    for seed in seed_order:
        if claimed[seed] >= 0:
            continue
        if not incident[seed]:
            continue  # isolated vertex: trivial by fill
        common = [
            li
            for li in range(len(lines))
            if all(conform[li][eid] for eid in incident[seed])
        ]
        if not common:
            continue
        li = common[0]  # first line in detection order
        idx = len(grown)
        members: list[int] = []
        claimed[seed] = idx
        members.append(seed)
        stack = [seed]
        while stack:
            v = stack.pop()
            for eid in sorted(incident[v]):
                w = int(g.dst[eid]) if int(g.src[eid]) == v else int(g.src[eid])
                if claimed[w] >= 0:
                    continue
                if not vertex_conforms(w, li):
                    continue
                if neighbor_claim_blocks(w, idx):
                    continue
                claimed[w] = idx
                members.append(w)
                stack.append(w)
        grown.append((lines[li], members))

    # Keep clusters meeting the size floor; dissolve the rest.
    keep: list[tuple[Line2D, list[int]]] = []
    remap = {}
    for idx, (line, members) in enumerate(grown):
        if len(members) >= n_min_vertices:
            remap[idx] = len(keep)
            keep.append((line, members))
        else:
            for v in members:
                claimed[v] = -1

    clusters: list[Cluster] = []
    cluster_of = np.full(n, -1, dtype=np.int64)
    for new_idx, (line, members) in enumerate(keep):
        vset = frozenset(members)
        eset = frozenset(
            eid
            for v in members
            for eid in g.out_edges[v]
            if int(g.dst[eid]) in vset
        )
        boundary = frozenset(
            v
            for v in members
            for eid in incident[v]
            if (int(g.dst[eid]) if int(g.src[eid]) == v else int(g.src[eid])) not in vset
        )
        clusters.append(
            Cluster(
                id=new_idx,
                vertices=vset,
                boundary=boundary,
                is_trivial=False,
                line=line,
                edges=eset,
            )
        )
        cluster_of[members] = new_idx

    for v in range(n):
        if cluster_of[v] < 0:
            cluster_of[v] = len(clusters)
            clusters.append(
                Cluster(
                    id=len(clusters),
                    vertices=frozenset((v,)),
                    boundary=frozenset((v,)),
                    is_trivial=True,
                )
            )
    return ClusterSet(clusters=clusters, cluster_of=cluster_of)
