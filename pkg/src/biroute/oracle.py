"""Ground-truth solvers: Dijkstra variants and an exact Pareto frontier search.

These are the reference implementations every approximate component is
checked against.  They are deliberately independent of the approximate
search engine: plain best-first searches over the bi-objective graph with
no shared machinery beyond the cost types.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .core import CostVec, dominates

if TYPE_CHECKING:
    from .graph_io import BiGraph

__all__ = [
    "FrontierSet",
    "PathWithCost",
    "ExtremePair",
    "dijkstra",
    "exact_pareto",
    "extreme_pair",
]


@dataclass(frozen=True)
class PathWithCost:
    cost: CostVec
    path: tuple[int, ...]


@dataclass(frozen=True)
class FrontierSet:
    """The complete Pareto frontier with one witness path per cost.

    Entries are sorted lexicographically by (c1, c2), so c1 is strictly
    increasing and c2 strictly decreasing.
    """

    paths: tuple[PathWithCost, ...]

    def costs(self) -> list[CostVec]:
        return [p.cost for p in self.paths]

    def __len__(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class ExtremePair:
    """The two corner paths of a frontier.

    `obj1` minimizes objective 1 (ties broken by minimal objective 2);
    `obj2` symmetrically.  Their costs are (c1_min, c2_bar) and
    (c1_bar, c2_min), bounding the frontier box.
    """

    obj1: PathWithCost
    obj2: PathWithCost


def _edge_weights(g: BiGraph, objective: int) -> np.ndarray:
    if objective == 1:
        return g.c1
    if objective == 2:
        return g.c2
    raise ValueError(f"objective must be 1 or 2, got {objective}")


def dijkstra(
    g: BiGraph,
    source: int,
    objective: int = 1,
    direction: str = "forward",
    restrict_to: Iterable[int] | None = None,
) -> np.ndarray:
    """Exact single-objective shortest distances from `source`.

    `direction="reverse"` runs on the transposed graph (distances *to*
    `source`).  With `restrict_to`, only the induced vertex subset is
    traversed; `source` must be inside it.  Unreachable vertices get +inf.
    """
    w = _edge_weights(g, objective)
    if direction == "forward":
        adj, heads = g.out_edges, g.dst
    elif direction == "reverse":
        adj, heads = g.in_edges, g.src
    else:
        raise ValueError(f"direction must be 'forward' or 'reverse', got {direction}")

    allowed: np.ndarray | None = None
    if restrict_to is not None:
        allowed = np.zeros(g.vertex_count, dtype=bool)
        allowed[list(restrict_to)] = True
        if not allowed[source]:
            raise ValueError("source is outside the restriction set")

    dist = np.full(g.vertex_count, math.inf)
    dist[source] = 0.0
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for eid in adj[u]:
            v = heads[eid]
            if allowed is not None and not allowed[v]:
                continue
            nd = d + w[eid]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _lex_dijkstra(
    g: BiGraph,
    source: int,
    primary: int,
    allowed: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Dijkstra on `primary` objective with the other objective as tie-break.

    Returns (primary distances, secondary distances, predecessor edge ids).
    The secondary distance is the minimum secondary cost among all
    primary-optimal paths, which makes the result the exact frontier corner.
    """
    wp = _edge_weights(g, primary)
    ws = _edge_weights(g, 3 - primary)
    dp = np.full(g.vertex_count, math.inf)
    ds = np.full(g.vertex_count, math.inf)
    pred = [-1] * g.vertex_count
    dp[source] = 0.0
    ds[source] = 0.0
    heap: list[tuple[float, float, int]] = [(0.0, 0.0, source)]
    while heap:
        p, s, u = heapq.heappop(heap)
        if (p, s) > (dp[u], ds[u]):
            continue
        for eid in g.out_edges[u]:
            v = g.dst[eid]
            if allowed is not None and not allowed[v]:
                continue
            np_, ns = p + wp[eid], s + ws[eid]
            if (np_, ns) < (dp[v], ds[v]):
                dp[v], ds[v] = np_, ns
                pred[v] = eid
                heapq.heappush(heap, (np_, ns, v))
    return dp, ds, pred


def _walk_back(g: BiGraph, pred: list[int], t: int) -> tuple[int, ...]:
    path = [t]
    v = t
    while pred[v] >= 0:
        eid = pred[v]
        v = int(g.src[eid])
        path.append(v)
    path.reverse()
    return tuple(path)


def extreme_pair(
    g: BiGraph,
    s: int,
    t: int,
    restrict_to: Iterable[int] | None = None,
) -> ExtremePair | None:
    """The frontier's two corner paths, or None when `t` is unreachable."""
    allowed: np.ndarray | None = None
    if restrict_to is not None:
        allowed = np.zeros(g.vertex_count, dtype=bool)
        allowed[list(restrict_to)] = True
        if not allowed[s]:
            raise ValueError("source is outside the restriction set")
        if not allowed[t]:
            return None

    d1, d1s, pred1 = _lex_dijkstra(g, s, 1, allowed)
    if not math.isfinite(d1[t]):
        return None
    d2, d2s, pred2 = _lex_dijkstra(g, s, 2, allowed)
    pi1 = PathWithCost(CostVec(float(d1[t]), float(d1s[t])), _walk_back(g, pred1, t))
    pi2 = PathWithCost(CostVec(float(d2s[t]), float(d2[t])), _walk_back(g, pred2, t))
    return ExtremePair(obj1=pi1, obj2=pi2)


def exact_pareto(
    g: BiGraph,
    s: int,
    t: int,
    restrict_to: Iterable[int] | None = None,
) -> FrontierSet:
    """The complete Pareto frontier of s->t paths, one witness path each.

    Best-first search with lexicographic (f1, f2) extraction, per-vertex
    min-g2 pruning and target-side global pruning.  Ties on (f1, f2) pop in
    FIFO insertion order so runs are reproducible.
    """
    allowed: np.ndarray | None = None
    if restrict_to is not None:
        allowed = np.zeros(g.vertex_count, dtype=bool)
        allowed[list(restrict_to)] = True
        if not allowed[s]:
            raise ValueError("source is outside the restriction set")
        if not allowed[t]:
            return FrontierSet(())

    h1 = dijkstra(g, t, 1, "reverse", restrict_to)
    h2 = dijkstra(g, t, 2, "reverse", restrict_to)
    if not math.isfinite(h1[s]):
        return FrontierSet(())

    g2_min = np.full(g.vertex_count, math.inf)
    counter = itertools.count()
    # Node: (g1, g2, vertex, parent-node-or-None, via-edge)
    root = (0.0, 0.0, s, None, -1)
    heap: list[tuple[float, float, int, tuple]] = [(h1[s], h2[s], next(counter), root)]
    solutions: list[tuple] = []

    while heap:
        f1, f2, _, node = heapq.heappop(heap)
        g1, g2, u, _, _ = node
        if g2 >= g2_min[u] or f2 >= g2_min[t]:
            continue
        g2_min[u] = g2
        if u == t:
            solutions.append(node)
            continue
        for eid in g.out_edges[u]:
            v = int(g.dst[eid])
            if allowed is not None and not allowed[v]:
                continue
            if not math.isfinite(h1[v]):
                continue
            ng1, ng2 = g1 + g.c1[eid], g2 + g.c2[eid]
            nf2 = ng2 + h2[v]
            if ng2 >= g2_min[v] or nf2 >= g2_min[t]:
                continue
            child = (ng1, ng2, v, node, eid)
            heapq.heappush(heap, (ng1 + h1[v], nf2, next(counter), child))

    out = []
    for node in solutions:
        path = []
        cur = node
        while cur is not None:
            path.append(cur[2])
            cur = cur[3]
        path.reverse()
        out.append(PathWithCost(CostVec(node[0], node[1]), tuple(path)))
    return FrontierSet(tuple(out))
