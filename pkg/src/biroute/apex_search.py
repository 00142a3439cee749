"""Approximate bi-objective best-first search over generalized graphs.

The engine maintains apex-path pairs: a search node carrying a
component-wise lower bound (the apex) for a whole bundle of paths plus one
concrete representative path.  Every edge of a :class:`GenGraph` carries a
representative cost ``c`` and an apex lower bound ``c_apex <= c``; a
regular edge has ``c_apex == c``, a super-edge stands in for a bundle of
cluster-interior paths.  Expanding a pair sums apexes with apexes and
representative costs with representative costs, which keeps every pair
eps-bounded (``rep <= (1+eps) * apex`` component-wise).

Two modes are provided: ``plain`` pushes every successor, and
``partial_expansion`` pushes super-edge successors lazily, one at a time in
increasing f-value order, generating a parent's next-best super-edge
successor when one of its super-edge children is popped.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .core import CostVec, Eps

if TYPE_CHECKING:
    from .graph_io import BiGraph, PreprocArtifact

__all__ = [
    "GenGraph",
    "Heuristic",
    "ApexPathPair",
    "SolutionSet",
    "SearchStats",
    "build_heuristic",
    "expand_pair",
    "try_merge",
    "search",
    "reconstruct_path",
]

KIND_REGULAR = 0
KIND_SUPER = 1


class GenGraph:
    """A directed graph whose edges carry dual costs (c, c_apex).

    Immutable after construction.  `provenance` (optional) tags each edge
    with its origin: ``("edge", original_edge_id)`` or
    ``("super", super_edge_index)``.  `vertex_labels` (optional) maps
    compact vertex ids back to the original graph's ids.
    """

    def __init__(
        self,
        vertex_count: int,
        src: np.ndarray,
        dst: np.ndarray,
        c1: np.ndarray,
        c2: np.ndarray,
        a1: np.ndarray,
        a2: np.ndarray,
        is_super: np.ndarray,
        provenance: list[tuple[str, int]] | None = None,
        vertex_labels: np.ndarray | None = None,
    ) -> None:
        self.vertex_count = int(vertex_count)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.c1 = np.asarray(c1, dtype=np.float64)
        self.c2 = np.asarray(c2, dtype=np.float64)
        self.a1 = np.asarray(a1, dtype=np.float64)
        self.a2 = np.asarray(a2, dtype=np.float64)
        self.is_super = np.asarray(is_super, dtype=bool)
        self.provenance = provenance
        self.vertex_labels = vertex_labels

        m = len(self.src)
        for arr in (self.dst, self.c1, self.c2, self.a1, self.a2, self.is_super):
            if len(arr) != m:
                raise ValueError("edge array lengths disagree")
        if m and (self.src.min() < 0 or self.src.max() >= vertex_count):
            raise ValueError("edge source out of range")
        if m and (self.dst.min() < 0 or self.dst.max() >= vertex_count):
            raise ValueError("edge target out of range")
        if np.any(self.a1 > self.c1) or np.any(self.a2 > self.c2):
            bad = int(np.argmax((self.a1 > self.c1) | (self.a2 > self.c2)))
            raise ValueError(f"edge {bad}: apex cost exceeds representative cost")
        trivial = ~self.is_super
        if np.any(self.a1[trivial] != self.c1[trivial]) or np.any(
            self.a2[trivial] != self.c2[trivial]
        ):
            raise ValueError("regular edges must have c_apex == c")

        self.out_regular: list[list[int]] = [[] for _ in range(vertex_count)]
        self.out_super: list[list[int]] = [[] for _ in range(vertex_count)]
        for eid in range(m):
            if self.is_super[eid]:
                self.out_super[int(self.src[eid])].append(eid)
            else:
                self.out_regular[int(self.src[eid])].append(eid)
        for arr in (self.src, self.dst, self.c1, self.c2, self.a1, self.a2, self.is_super):
            arr.flags.writeable = False

    @property
    def edge_count(self) -> int:
        return len(self.src)

    @classmethod
    def from_bigraph(cls, g: BiGraph) -> GenGraph:
        """All-trivial generalized graph: every edge gets c_apex = c."""
        m = g.edge_count
        return cls(
            g.vertex_count,
            g.src.copy(),
            g.dst.copy(),
            g.c1.copy(),
            g.c2.copy(),
            g.c1.copy(),
            g.c2.copy(),
            np.zeros(m, dtype=bool),
        )

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Sequence[tuple[int, int, CostVec, CostVec, int]],
    ) -> GenGraph:
        """Build from (src, dst, c, c_apex, kind) tuples."""
        m = len(edges)
        src = np.empty(m, dtype=np.int64)
        dst = np.empty(m, dtype=np.int64)
        c1 = np.empty(m)
        c2 = np.empty(m)
        a1 = np.empty(m)
        a2 = np.empty(m)
        sup = np.empty(m, dtype=bool)
        for i, (u, v, c, a, kind) in enumerate(edges):
            src[i], dst[i] = u, v
            c1[i], c2[i] = c.c1, c.c2
            a1[i], a2[i] = a.c1, a.c2
            sup[i] = kind == KIND_SUPER
        return cls(vertex_count, src, dst, c1, c2, a1, a2, sup)

    def check_eps_bounded(self, eps: Eps) -> None:
        """Raise unless every edge satisfies c <= (1+eps) * c_apex exactly."""
        ok = (self.c1 <= (1.0 + eps.e1) * self.a1) & (self.c2 <= (1.0 + eps.e2) * self.a2)
        if not np.all(ok):
            bad = int(np.argmin(ok))
            raise ValueError(
                f"edge {bad} is not eps-bounded for eps={eps.as_tuple()}: "
                f"c=({self.c1[bad]},{self.c2[bad]}) c_apex=({self.a1[bad]},{self.a2[bad]})"
            )

    def edge_cost(self, eid: int) -> CostVec:
        return CostVec(float(self.c1[eid]), float(self.c2[eid]))

    def edge_apex(self, eid: int) -> CostVec:
        return CostVec(float(self.a1[eid]), float(self.a2[eid]))


@dataclass(frozen=True)
class Heuristic:
    """Per-vertex lower bounds to the target, one per objective.

    Built on the apex costs so admissibility survives super-edges;
    +inf marks vertices that cannot reach the target.
    """

    h1: np.ndarray
    h2: np.ndarray

    def at(self, v: int) -> tuple[float, float]:
        return (float(self.h1[v]), float(self.h2[v]))


def build_heuristic(g: GenGraph, t: int) -> Heuristic:
    """Reverse Dijkstra per objective over the apex costs."""
    if not (0 <= t < g.vertex_count):
        raise ValueError(f"target {t} out of range")
    in_edges: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for eid in range(g.edge_count):
        in_edges[int(g.dst[eid])].append(eid)

    out = []
    for w in (g.a1, g.a2):
        dist = np.full(g.vertex_count, math.inf)
        dist[t] = 0.0
        heap: list[tuple[float, int]] = [(0.0, t)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for eid in in_edges[v]:
                u = int(g.src[eid])
                nd = d + w[eid]
                if nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        out.append(dist)
    return Heuristic(h1=out[0], h2=out[1])


class ApexPathPair:
    """Search node: apex lower bound + one representative path.

    The representative path is stored as a back-pointer chain
    (`parent`, `via_edge`).  `pe_cursors` holds deferred partial-expansion
    continuations: (parent pair, next super-edge index) entries that fire
    once when this pair is popped.
    """

    __slots__ = ("apex", "rep_cost", "at_vertex", "parent", "via_edge", "pe_cursors", "seq", "alive")

    def __init__(
        self,
        apex: CostVec,
        rep_cost: CostVec,
        at_vertex: int,
        parent: ApexPathPair | None = None,
        via_edge: int | None = None,
        pe_cursors: tuple = (),
    ) -> None:
        if not apex.weakly_dominates(rep_cost):
            raise ValueError(f"apex {apex} must weakly dominate rep_cost {rep_cost}")
        self.apex = apex
        self.rep_cost = rep_cost
        self.at_vertex = at_vertex
        self.parent = parent
        self.via_edge = via_edge
        self.pe_cursors = pe_cursors
        self.seq = -1
        self.alive = False

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"ApexPathPair(v={self.at_vertex}, apex={self.apex.as_tuple()}, "
            f"rep={self.rep_cost.as_tuple()})"
        )


@dataclass
class SolutionSet:
    """Apex-path pairs at the target whose representative costs are the answer."""

    pairs: list[ApexPathPair]
    min_truncated: dict[int, float] = field(default_factory=dict)

    def costs(self) -> list[CostVec]:
        return [p.rep_cost for p in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class SearchStats:
    expansions: int = 0
    generations: int = 0
    insertions: int = 0
    merges: int = 0
    stale_skips: int = 0
    open_peak: int = 0
    super_edge_insertions: int = 0
    solutions: int = 0
    wall_ms: float = 0.0
    expanded_vertices: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "expansions": self.expansions,
            "generations": self.generations,
            "insertions": self.insertions,
            "merges": self.merges,
            "open_peak": self.open_peak,
            "super_edge_insertions": self.super_edge_insertions,
            "solutions": self.solutions,
            "wall_ms": self.wall_ms,
        }


def expand_pair(ap: ApexPathPair, g: GenGraph, eid: int, eps: Eps) -> ApexPathPair:
    """Successor pair along edge `eid`: apexes add apexes, reps add reps.

    eps-boundedness is closed under this operation: if both the pair and
    the edge satisfy ``rep <= (1+eps) * apex``, so does the result (the
    inequality is preserved by component-wise addition).  `eps` is accepted
    for interface symmetry; the operation itself never consults it.
    """
    del eps
    if int(g.src[eid]) != ap.at_vertex:
        raise ValueError("edge does not leave the pair's vertex")
    return ApexPathPair(
        apex=ap.apex + g.edge_apex(eid),
        rep_cost=ap.rep_cost + g.edge_cost(eid),
        at_vertex=int(g.dst[eid]),
        parent=ap,
        via_edge=eid,
    )


def _eps_bounded(rep: CostVec, apex: CostVec, eps: Eps) -> bool:
    return rep.c1 <= (1.0 + eps.e1) * apex.c1 and rep.c2 <= (1.0 + eps.e2) * apex.c2


def try_merge(a: ApexPathPair, b: ApexPathPair, eps: Eps) -> ApexPathPair | None:
    """Merge two same-vertex pairs into one, or None when neither
    representative keeps the merged pair eps-bounded.

    The merged apex is the element-wise minimum of the two apexes.  The
    representative is whichever original representative still satisfies
    ``rep <= (1+eps) * apex`` against the merged apex; when both qualify the
    lexicographically smaller representative cost wins.  The cost-space form
    of the bound (rather than the f-value form) is used deliberately: it is
    closed under expansion by apex-edges, the f-value form is not.
    """
    if a.at_vertex != b.at_vertex:
        raise ValueError("can only merge pairs at the same vertex")
    apex = a.apex.min_with(b.apex)
    a_ok = _eps_bounded(a.rep_cost, apex, eps)
    b_ok = _eps_bounded(b.rep_cost, apex, eps)
    if not a_ok and not b_ok:
        return None
    if a_ok and b_ok:
        keep = a if a.rep_cost.as_tuple() <= b.rep_cost.as_tuple() else b
    else:
        keep = a if a_ok else b
    merged = ApexPathPair(
        apex=apex,
        rep_cost=keep.rep_cost,
        at_vertex=keep.at_vertex,
        parent=keep.parent,
        via_edge=keep.via_edge,
        pe_cursors=a.pe_cursors + b.pe_cursors,
    )
    return merged


def search(
    g: GenGraph,
    s: int,
    t: int,
    eps: Eps,
    mode: str = "plain",
    heuristic: Heuristic | None = None,
    trace_sink: list | None = None,
) -> tuple[SolutionSet, SearchStats]:
    """Approximate Pareto set search from `s` to `t`.

    The returned representative costs eps-dominate the Pareto frontier of
    the graph under the representative costs.  OPEN is ordered
    lexicographically by (f1, f2) with FIFO tie-breaking; a popped pair is
    dropped when its truncated f-value (f2) is weakly dominated by the
    minimum truncated value already expanded at its vertex, or when a
    solution's representative truncated f-value eps-dominates it (in which
    case that solution's apex absorbs the candidate's f-value).  Generated
    pairs run the same checks and are merge-attempted against same-vertex
    OPEN pairs before insertion.

    ``mode="partial_expansion"`` inserts at most one super-edge successor
    per expansion (the lowest-ordered unconsumed one); popping a pair
    generated from a super-edge first generates its parent's next-ordered
    super-edge successor.
    """
    if mode not in ("plain", "partial_expansion"):
        raise ValueError(f"unknown mode {mode!r}")
    for name, v in (("source", s), ("target", t)):
        if not (0 <= v < g.vertex_count):
            raise ValueError(f"{name} {v} out of range")
    g.check_eps_bounded(eps)

    t0 = time.perf_counter()
    stats = SearchStats()
    h = heuristic if heuristic is not None else build_heuristic(g, t)
    h1, h2 = h.h1, h.h2
    partial = mode == "partial_expansion"

    if not math.isfinite(h1[s]):
        stats.wall_ms = (time.perf_counter() - t0) * 1000.0
        return SolutionSet(pairs=[]), stats

    counter = itertools.count()
    heap: list[tuple[float, float, int, ApexPathPair]] = []
    open_at: dict[int, dict[int, ApexPathPair]] = {}
    g_cl: dict[int, float] = {}
    solutions: list[ApexPathPair] = []
    open_size = 0
    super_order_cache: dict[int, list[int]] = {}

    e1p = 1.0 + eps.e1
    e2p = 1.0 + eps.e2

    def f_of(pair: ApexPathPair) -> tuple[float, float]:
        v = pair.at_vertex
        return (pair.apex.c1 + h1[v], pair.apex.c2 + h2[v])

    def is_dominated(pair: ApexPathPair, f1: float, f2: float) -> bool:
        for sol in solutions:
            if sol.rep_cost.c2 <= e2p * f2:
                # Absorb the pruned candidate's f-value into the solution's
                # apex; the lexicographic pop order keeps the result bounded.
                sol.apex = sol.apex.min_with(CostVec(f1, f2))
                return True
        return g_cl.get(pair.at_vertex, math.inf) <= f2

    def insert_open(pair: ApexPathPair, from_super: bool) -> None:
        nonlocal open_size
        v = pair.at_vertex
        bucket = open_at.setdefault(v, {})
        cur = pair
        for seq in list(bucket):
            other = bucket[seq]
            merged = try_merge(other, cur, eps)
            if merged is not None:
                other.alive = False
                del bucket[seq]
                open_size -= 1
                stats.merges += 1
                cur = merged
        cur.seq = next(counter)
        cur.alive = True
        bucket[cur.seq] = cur
        f1, f2 = f_of(cur)
        heapq.heappush(heap, (f1, f2, cur.seq, cur))
        open_size += 1
        stats.insertions += 1
        if from_super:
            stats.super_edge_insertions += 1
        if open_size > stats.open_peak:
            stats.open_peak = open_size

    def try_generate(parent: ApexPathPair, eid: int, cursors: tuple) -> bool:
        v2 = int(g.dst[eid])
        if not math.isfinite(h1[v2]):
            return False
        child = ApexPathPair(
            apex=parent.apex + g.edge_apex(eid),
            rep_cost=parent.rep_cost + g.edge_cost(eid),
            at_vertex=v2,
            parent=parent,
            via_edge=eid,
            pe_cursors=cursors,
        )
        stats.generations += 1
        f1, f2 = f_of(child)
        if is_dominated(child, f1, f2):
            return False
        insert_open(child, from_super=bool(g.is_super[eid]))
        return True

    def super_edges_of(v: int) -> list[int]:
        order = super_order_cache.get(v)
        if order is None:
            order = sorted(
                g.out_super[v],
                key=lambda eid: (
                    g.a1[eid] + h1[g.dst[eid]],
                    g.a2[eid] + h2[g.dst[eid]],
                    eid,
                ),
            )
            super_order_cache[v] = order
        return order

    def advance_super(parent: ApexPathPair, start_idx: int) -> None:
        supers = super_edges_of(parent.at_vertex)
        for idx in range(start_idx, len(supers)):
            if try_generate(parent, supers[idx], ((parent, idx + 1),)):
                return

    def add_solution(pair: ApexPathPair) -> None:
        for i, sol in enumerate(solutions):
            merged = try_merge(sol, pair, eps)
            if merged is not None:
                solutions[i] = merged
                stats.merges += 1
                return
        solutions.append(pair)

    root = ApexPathPair(CostVec(0.0, 0.0), CostVec(0.0, 0.0), s)
    insert_open(root, from_super=False)

    while heap:
        f1, f2, seq, pair = heapq.heappop(heap)
        if not pair.alive:
            stats.stale_skips += 1
            continue
        pair.alive = False
        del open_at[pair.at_vertex][seq]
        open_size -= 1

        if pair.pe_cursors:
            cursors, pair.pe_cursors = pair.pe_cursors, ()
            for par, idx in cursors:
                advance_super(par, idx)

        if is_dominated(pair, f1, f2):
            continue

        g_cl[pair.at_vertex] = f2
        stats.expansions += 1
        stats.expanded_vertices.append(pair.at_vertex)
        if trace_sink is not None:
            trace_sink.append(
                (pair.at_vertex, pair.apex.as_tuple(), pair.rep_cost.as_tuple())
            )

        if pair.at_vertex == t:
            add_solution(pair)
            continue

        for eid in g.out_regular[pair.at_vertex]:
            try_generate(pair, eid, ())
        if partial:
            advance_super(pair, 0)
        else:
            for eid in super_edges_of(pair.at_vertex):
                try_generate(pair, eid, ())

    # Late apex absorptions can make previously unmergeable solutions
    # mergeable; consolidate until a fixpoint so the returned set is as
    # small as the bound allows.
    changed = True
    while changed:
        changed = False
        for i in range(len(solutions)):
            for j in range(i + 1, len(solutions)):
                merged = try_merge(solutions[i], solutions[j], eps)
                if merged is not None:
                    solutions[i] = merged
                    del solutions[j]
                    stats.merges += 1
                    changed = True
                    break
            if changed:
                break

    solutions.sort(key=lambda p: (p.rep_cost.as_tuple(), p.apex.as_tuple()))
    stats.solutions = len(solutions)
    stats.wall_ms = (time.perf_counter() - t0) * 1000.0
    return SolutionSet(pairs=solutions, min_truncated=dict(g_cl)), stats


def reconstruct_path(
    ap: ApexPathPair,
    g: GenGraph,
    artifact: PreprocArtifact | None = None,
) -> list[int]:
    """Full vertex sequence in the original graph for `ap`'s representative.

    Traversed super-edges are replaced by their stored representative
    paths from `artifact`; the sequence's cost under the original costs
    equals ``ap.rep_cost``.  Raises when a needed representative path is
    absent.
    """
    chain: list[int] = []
    cur: ApexPathPair | None = ap
    while cur is not None and cur.via_edge is not None:
        chain.append(cur.via_edge)
        cur = cur.parent
    chain.reverse()
    start = cur.at_vertex if cur is not None else ap.at_vertex

    def label(v: int) -> int:
        return int(g.vertex_labels[v]) if g.vertex_labels is not None else int(v)

    path = [label(start)]
    for eid in chain:
        prov = g.provenance[eid] if g.provenance is not None else ("edge", eid)
        if prov[0] == "edge":
            path.append(label(int(g.dst[eid])))
        else:
            if artifact is None:
                raise ValueError("path crosses a super-edge but no artifact was given")
            rec = artifact.super_edges[prov[1]]
            if rec.rep_path is None:
                raise ValueError(
                    f"artifact stores no representative path for super-edge {prov[1]}"
                )
            if rec.rep_path[0] != path[-1]:
                raise ValueError("super-edge representative path does not start here")
            path.extend(rec.rep_path[1:])
    return path
