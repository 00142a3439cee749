"""Graph loading, normalization, synthetic instances and artifact persistence.

The on-disk formats are deliberately plain: a versioned JSON document for
graphs and for preprocessing artifacts (debuggability beats compactness at
this scale), and the standard DIMACS ``.gr`` format for road-network input
pairs.  All loaders are strict: malformed input raises :class:`FormatError`
or :class:`ArtifactError` rather than guessing.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .core import CostVec, Eps, Line2D
from .clustering import Cluster, ClusterSet

__all__ = [
    "FormatError",
    "ArtifactError",
    "BiGraph",
    "NormalizationScales",
    "SyntheticSpec",
    "SyntheticTruth",
    "ClusterRecord",
    "SuperEdgeRecord",
    "PreprocArtifact",
    "load_dimacs_pair",
    "normalize_costs",
    "generate_synthetic",
    "save_graph",
    "load_graph",
    "save_artifact",
    "load_artifact",
    "graph_fingerprint",
]

GRAPH_FORMAT_VERSION = 1
ARTIFACT_FORMAT_VERSION = 1

# Cost grid for synthetic instances: dyadic steps keep every partial path
# sum exactly representable in float64, so path costs recompute bit-exactly
# regardless of summation order.
_COST_QUANTUM = 2.0**-20


class FormatError(ValueError):
    """Malformed graph input (DIMACS or JSON)."""


class ArtifactError(ValueError):
    """Artifact version/shape/invariant failure."""


class BiGraph:
    """Directed graph with a two-component cost per edge.

    Parallel edges are permitted.  Costs are float64; integer inputs stay
    exactly representable.  Immutable after construction.
    """

    def __init__(
        self,
        vertex_count: int,
        src: np.ndarray,
        dst: np.ndarray,
        c1: np.ndarray,
        c2: np.ndarray,
    ) -> None:
        self.vertex_count = int(vertex_count)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.c1 = np.asarray(c1, dtype=np.float64)
        self.c2 = np.asarray(c2, dtype=np.float64)
        m = len(self.src)
        if not (len(self.dst) == len(self.c1) == len(self.c2) == m):
            raise ValueError("edge array lengths disagree")
        if m:
            if self.src.min() < 0 or self.src.max() >= vertex_count:
                raise ValueError("edge source out of range")
            if self.dst.min() < 0 or self.dst.max() >= vertex_count:
                raise ValueError("edge target out of range")
            if self.c1.min() < 0 or self.c2.min() < 0:
                raise ValueError("negative edge cost")
        self.out_edges: list[list[int]] = [[] for _ in range(vertex_count)]
        self.in_edges: list[list[int]] = [[] for _ in range(vertex_count)]
        for eid in range(m):
            self.out_edges[int(self.src[eid])].append(eid)
            self.in_edges[int(self.dst[eid])].append(eid)
        for arr in (self.src, self.dst, self.c1, self.c2):
            arr.flags.writeable = False

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def cost(self, eid: int) -> CostVec:
        return CostVec(float(self.c1[eid]), float(self.c2[eid]))

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Sequence[tuple[int, int, float, float]],
    ) -> BiGraph:
        m = len(edges)
        src = np.empty(m, dtype=np.int64)
        dst = np.empty(m, dtype=np.int64)
        c1 = np.empty(m)
        c2 = np.empty(m)
        for i, (u, v, a, b) in enumerate(edges):
            src[i], dst[i], c1[i], c2[i] = u, v, a, b
        return cls(vertex_count, src, dst, c1, c2)

    def edges(self) -> Iterable[tuple[int, int, float, float]]:
        for i in range(self.edge_count):
            yield int(self.src[i]), int(self.dst[i]), float(self.c1[i]), float(self.c2[i])

    def induced(self, vertices: Iterable[int]) -> tuple[BiGraph, np.ndarray, np.ndarray]:
        """Induced subgraph on `vertices`.

        Returns (subgraph, old vertex ids, old edge ids); subgraph vertex k
        corresponds to old id ``old_vertex_ids[k]``.
        """
        old_ids = np.array(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        to_new = {int(v): i for i, v in enumerate(old_ids)}
        keep = [
            eid
            for eid in range(self.edge_count)
            if int(self.src[eid]) in to_new and int(self.dst[eid]) in to_new
        ]
        old_eids = np.array(keep, dtype=np.int64)
        sub = BiGraph(
            len(old_ids),
            np.array([to_new[int(self.src[e])] for e in keep], dtype=np.int64),
            np.array([to_new[int(self.dst[e])] for e in keep], dtype=np.int64),
            self.c1[old_eids].copy() if keep else np.empty(0),
            self.c2[old_eids].copy() if keep else np.empty(0),
        )
        return sub, old_ids, old_eids


@dataclass(frozen=True)
class NormalizationScales:
    """Per-objective maxima used to map costs into the unit square."""

    max_c1: float
    max_c2: float

    def __post_init__(self) -> None:
        if self.max_c1 <= 0 or self.max_c2 <= 0:
            raise ValueError("normalization scales must be strictly positive")


def normalize_costs(g: BiGraph) -> tuple[BiGraph, NormalizationScales]:
    """Divide each cost component by its objective-wide maximum."""
    if g.edge_count == 0:
        raise ValueError("cannot normalize an edgeless graph")
    m1 = float(g.c1.max())
    m2 = float(g.c2.max())
    if m1 <= 0:
        raise ValueError("objective 1 is all-zero; cannot normalize")
    if m2 <= 0:
        raise ValueError("objective 2 is all-zero; cannot normalize")
    out = BiGraph(g.vertex_count, g.src.copy(), g.dst.copy(), g.c1 / m1, g.c2 / m2)
    return out, NormalizationScales(m1, m2)


# ---------------------------------------------------------------------------
# DIMACS
# ---------------------------------------------------------------------------


def _parse_gr(stream: IO[str] | IO[bytes], name: str):
    header: tuple[int, int] | None = None
    arcs: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("ascii", errors="replace")
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None:
                raise FormatError(f"{name}:{lineno}: duplicate problem line")
            if len(parts) != 4 or parts[1] != "sp":
                raise FormatError(f"{name}:{lineno}: malformed problem line {line!r}")
            header = (int(parts[2]), int(parts[3]))
        elif parts[0] == "a":
            if len(parts) != 4:
                raise FormatError(f"{name}:{lineno}: malformed arc line {line!r}")
            u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
            if w < 0:
                raise FormatError(f"{name}:{lineno}: negative weight {w}")
            arcs.append((u, v, w))
        else:
            raise FormatError(f"{name}:{lineno}: unknown line type {parts[0]!r}")
    if header is None:
        raise FormatError(f"{name}: missing problem line")
    n, m = header
    if len(arcs) != m:
        raise FormatError(f"{name}: problem line declares {m} arcs, found {len(arcs)}")
    for u, v, _ in arcs:
        if not (1 <= u <= n and 1 <= v <= n):
            raise FormatError(f"{name}: arc endpoint out of range 1..{n}: ({u},{v})")
    return n, arcs


def _as_text_stream(f) -> IO[str]:
    if isinstance(f, (str, Path)):
        return open(f, "r")
    if isinstance(f, (bytes, bytearray)):
        return io.StringIO(bytes(f).decode("ascii"))
    return f


def load_dimacs_pair(gr_file_1, gr_file_2) -> BiGraph:
    """Zip two DIMACS `.gr` files positionally into one bi-objective graph.

    Both files must declare the same vertex/arc counts and list the same
    arc endpoints in the same order; a mismatch at any position is a hard
    error (joins by endpoint pair would be ambiguous for parallel arcs).
    Arc k gets cost (weight from file 1, weight from file 2).
    """
    s1, s2 = _as_text_stream(gr_file_1), _as_text_stream(gr_file_2)
    n1, arcs1 = _parse_gr(s1, "objective-1 file")
    n2, arcs2 = _parse_gr(s2, "objective-2 file")
    if n1 != n2 or len(arcs1) != len(arcs2):
        raise FormatError(
            f"header mismatch: ({n1} vertices, {len(arcs1)} arcs) vs "
            f"({n2} vertices, {len(arcs2)} arcs)"
        )
    m = len(arcs1)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    c1 = np.empty(m)
    c2 = np.empty(m)
    for k in range(m):
        u1, v1, w1 = arcs1[k]
        u2, v2, w2 = arcs2[k]
        if (u1, v1) != (u2, v2):
            raise FormatError(
                f"arc {k}: endpoint mismatch ({u1},{v1}) vs ({u2},{v2})"
            )
        src[k], dst[k] = u1 - 1, v1 - 1
        c1[k], c2[k] = w1, w2
    return BiGraph(n1, src, dst, c1, c2)


# ---------------------------------------------------------------------------
# Synthetic instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted-correlation instance.

    Vertices are partitioned into `n_lines` contiguous regions; each region
    gets one positive-slope line and every edge whose source lies in the
    region samples its cost on that line plus perpendicular noise bounded
    so the normalized distance stays <= delta_plant.
    """

    n_vertices: int
    topology: str = "grid"  # "grid" | "random-regular"
    n_lines: int = 2
    delta_plant: float = 0.02
    region_layout: str = "bands"
    rng_seed: int = 0
    degree: int = 4  # random-regular only
    noise_scale: float = 0.5  # fraction of delta_plant used for raw noise

    def __post_init__(self) -> None:
        if self.n_lines < 1:
            raise ValueError("n_lines must be >= 1")
        if self.delta_plant < 0:
            raise ValueError("delta_plant must be >= 0")
        if self.topology not in ("grid", "random-regular"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.region_layout != "bands":
            raise ValueError(f"unknown region layout {self.region_layout!r}")


@dataclass(frozen=True)
class SyntheticTruth:
    """Planted ground truth: normalized-space lines and per-edge assignment."""

    lines: tuple[Line2D, ...]
    edge_line: tuple[int, ...]
    vertex_region: tuple[int, ...]


def _grid_shape(n: int) -> tuple[int, int]:
    rows = max(1, int(math.isqrt(n)))
    cols = (n + rows - 1) // rows
    return rows, cols


def _topology_edges(spec: SyntheticSpec) -> tuple[int, list[tuple[int, int]]]:
    if spec.topology == "grid":
        rows, cols = _grid_shape(spec.n_vertices)
        n = rows * cols
        pairs = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    pairs.append((v, v + 1))
                if r + 1 < rows:
                    pairs.append((v, v + cols))
        edges = [(u, v) for u, v in pairs] + [(v, u) for u, v in pairs]
        return n, edges
    import networkx as nx

    d = spec.degree
    n = spec.n_vertices
    if (n * d) % 2 == 1:
        n += 1
    ug = nx.random_regular_graph(d, n, seed=spec.rng_seed)
    pairs = sorted((min(u, v), max(u, v)) for u, v in ug.edges())
    edges = [(u, v) for u, v in pairs] + [(v, u) for u, v in pairs]
    return n, edges


def _region_of_vertices(spec: SyntheticSpec, n: int) -> np.ndarray:
    if spec.n_lines > n:
        raise ValueError("more regions than vertices")
    region = np.zeros(n, dtype=np.int64)
    if spec.topology == "grid":
        rows, cols = _grid_shape(n)
        # Contiguous column bands.
        band = np.minimum((np.arange(cols) * spec.n_lines) // cols, spec.n_lines - 1)
        for v in range(n):
            region[v] = band[v % cols]
    else:
        region = np.minimum((np.arange(n) * spec.n_lines) // n, spec.n_lines - 1)
    return region


def generate_synthetic(spec: SyntheticSpec) -> tuple[BiGraph, SyntheticTruth]:
    """Deterministic planted-correlation instance plus its ground truth.

    Every edge's normalized cost sits within perpendicular distance
    `delta_plant` of its assigned line; with `delta_plant=0` costs sit
    exactly on the lines.  Same seed, same spec => identical graphs.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n, edge_pairs = _topology_edges(spec)
    region = _region_of_vertices(spec, n)
    m = len(edge_pairs)

    # Planted lines y = slope*x + intercept in sample space, spread apart
    # vertically so delta-tubes stay disjoint.
    gap = max(0.1, 8.0 * spec.delta_plant)
    slopes = rng.uniform(0.6, 1.4, size=spec.n_lines)
    intercepts = 0.08 + gap * np.arange(spec.n_lines) + rng.uniform(
        0.0, 0.3 * gap, size=spec.n_lines
    )

    src = np.array([u for u, _ in edge_pairs], dtype=np.int64)
    dst = np.array([v for _, v in edge_pairs], dtype=np.int64)
    edge_line = region[src]

    x = rng.uniform(0.15, 1.0, size=m)
    y_on = slopes[edge_line] * x + intercepts[edge_line]
    noise = rng.uniform(-1.0, 1.0, size=m) * (spec.noise_scale * spec.delta_plant)
    # Perpendicular offset: move along the unit normal of each edge's line.
    norm = np.sqrt(slopes[edge_line] ** 2 + 1.0)
    px = x - noise * slopes[edge_line] / norm
    py = y_on + noise / norm

    if spec.delta_plant > 0:
        px = np.round(px / _COST_QUANTUM) * _COST_QUANTUM
        py = np.round(py / _COST_QUANTUM) * _COST_QUANTUM
    px = np.maximum(px, _COST_QUANTUM)
    py = np.maximum(py, _COST_QUANTUM)

    # Express the planted lines in the normalized space the consumers see.
    # Sample-space line a*x + b*y + 1 = 0 maps to (a*Mx)*x' + (b*My)*y' + 1 = 0
    # under normalization x' = x/Mx, y' = y/My.
    def normalized_lines() -> list[Line2D]:
        mx, my = float(px.max()), float(py.max())
        out = []
        for k in range(spec.n_lines):
            # y = s*x + q  =>  (s/q)*x + (-1/q)*y + 1 = 0
            a = slopes[k] / intercepts[k]
            b = -1.0 / intercepts[k]
            out.append(Line2D(a * mx, b * my))
        return out

    # Noise shrink loop: anisotropic normalization can expand perpendicular
    # distances by up to 1/min(Mx, My); shrink offending offsets until every
    # edge conforms in normalized space.  With the default noise margin the
    # first pass nearly always conforms.
    for _ in range(10):
        lines = normalized_lines()
        mx, my = float(px.max()), float(py.max())
        bad = []
        for k, ln in enumerate(lines):
            sel = edge_line == k
            d = np.abs(ln.a * (px[sel] / mx) + ln.b * (py[sel] / my) + 1.0) / math.hypot(
                ln.a, ln.b
            )
            if np.any(d > spec.delta_plant) and spec.delta_plant > 0:
                bad.append(k)
            elif spec.delta_plant == 0 and np.any(d > 1e-12):
                bad.append(k)
        if not bad:
            break
        for k in bad:
            sel = edge_line == k
            yk = slopes[k] * px[sel] + intercepts[k]
            shrunk = yk + 0.5 * (py[sel] - yk)
            py[sel] = np.round(shrunk / _COST_QUANTUM) * _COST_QUANTUM
    else:
        raise RuntimeError("could not bound planted noise after shrinking")

    g = BiGraph(n, src, dst, px, py)
    truth = SyntheticTruth(
        lines=tuple(lines),
        edge_line=tuple(int(k) for k in edge_line),
        vertex_region=tuple(int(r) for r in region),
    )
    return g, truth


# ---------------------------------------------------------------------------
# Graph persistence
# ---------------------------------------------------------------------------


def _canonical_dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_graph(g: BiGraph, sink) -> None:
    doc = {
        "format": "biroute.graph",
        "version": GRAPH_FORMAT_VERSION,
        "vertex_count": g.vertex_count,
        "edges": [[u, v, a, b] for u, v, a, b in g.edges()],
    }
    text = _canonical_dumps(doc)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


def load_graph(source) -> BiGraph:
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"graph file is not valid JSON: {e}") from e
    if doc.get("format") != "biroute.graph":
        raise FormatError("not a graph file")
    if doc.get("version") != GRAPH_FORMAT_VERSION:
        raise FormatError(f"unsupported graph version {doc.get('version')}")
    edges = [(int(u), int(v), float(a), float(b)) for u, v, a, b in doc["edges"]]
    return BiGraph.from_edges(int(doc["vertex_count"]), edges)


def graph_fingerprint(g: BiGraph, delta: float, eps: Eps) -> str:
    """Hash binding an artifact to the exact graph and parameters it was built from."""
    h = hashlib.sha256()
    h.update(np.int64(g.vertex_count).tobytes())
    h.update(g.src.tobytes())
    h.update(g.dst.tobytes())
    h.update(g.c1.tobytes())
    h.update(g.c2.tobytes())
    h.update(repr((delta, eps.e1, eps.e2, ARTIFACT_FORMAT_VERSION)).encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Preprocessing artifact
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterRecord:
    """Persisted non-trivial cluster: line, members, boundary."""

    id: int
    line_a: float
    line_b: float
    vertices: tuple[int, ...]
    boundary: tuple[int, ...]


@dataclass(frozen=True)
class SuperEdgeRecord:
    """Persisted super-edge between two boundary vertices of one cluster."""

    cluster_id: int
    b_i: int
    b_j: int
    c: CostVec
    c_apex: CostVec
    rep_path: tuple[int, ...] | None


@dataclass(frozen=True)
class PreprocArtifact:
    """Everything the query phase needs, persisted as versioned JSON."""

    delta: float
    eps: Eps
    n_vertices: int
    fingerprint: str
    clusters: tuple[ClusterRecord, ...]
    super_edges: tuple[SuperEdgeRecord, ...]
    version: int = ARTIFACT_FORMAT_VERSION

    def cluster_set(self) -> ClusterSet:
        nontrivial = [
            Cluster(
                id=i,
                vertices=frozenset(rec.vertices),
                boundary=frozenset(rec.boundary),
                is_trivial=False,
                line=Line2D(rec.line_a, rec.line_b),
                edges=None,
            )
            for i, rec in enumerate(self.clusters)
        ]
        return ClusterSet.from_nontrivial(self.n_vertices, nontrivial)

    def validate(self) -> None:
        seen: set[int] = set()
        for rec in self.clusters:
            vs = set(rec.vertices)
            if seen & vs:
                raise ArtifactError("cluster vertex sets overlap")
            seen |= vs
            if not set(rec.boundary) <= vs:
                raise ArtifactError(f"cluster {rec.id}: boundary not within members")
        for k, se in enumerate(self.super_edges):
            if not se.c_apex.weakly_dominates(se.c):
                raise ArtifactError(f"super-edge {k}: apex exceeds representative cost")
            if se.c.c1 > (1.0 + self.eps.e1) * se.c_apex.c1 or se.c.c2 > (
                1.0 + self.eps.e2
            ) * se.c_apex.c2:
                raise ArtifactError(f"super-edge {k}: not eps-bounded for artifact eps")
            if se.rep_path is not None:
                if not se.rep_path or se.rep_path[0] != se.b_i or se.rep_path[-1] != se.b_j:
                    raise ArtifactError(f"super-edge {k}: representative path endpoints")


def save_artifact(a: PreprocArtifact, sink) -> None:
    a.validate()
    doc = {
        "format": "biroute.artifact",
        "version": a.version,
        "delta": a.delta,
        "eps": [a.eps.e1, a.eps.e2],
        "n_vertices": a.n_vertices,
        "fingerprint": a.fingerprint,
        "clusters": [
            {
                "id": c.id,
                "line": [c.line_a, c.line_b],
                "vertices": list(c.vertices),
                "boundary": list(c.boundary),
            }
            for c in a.clusters
        ],
        "super_edges": [
            {
                "cluster_id": s.cluster_id,
                "b_i": s.b_i,
                "b_j": s.b_j,
                "c": [s.c.c1, s.c.c2],
                "c_apex": [s.c_apex.c1, s.c_apex.c2],
                "rep_path": list(s.rep_path) if s.rep_path is not None else None,
            }
            for s in a.super_edges
        ],
    }
    text = _canonical_dumps(doc)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


def load_artifact(source) -> PreprocArtifact:
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"artifact is not valid JSON: {e}") from e
    if doc.get("format") != "biroute.artifact":
        raise ArtifactError("not an artifact file")
    if doc.get("version") != ARTIFACT_FORMAT_VERSION:
        raise ArtifactError(f"unsupported artifact version {doc.get('version')}")
    try:
        clusters = tuple(
            ClusterRecord(
                id=int(c["id"]),
                line_a=float(c["line"][0]),
                line_b=float(c["line"][1]),
                vertices=tuple(int(v) for v in c["vertices"]),
                boundary=tuple(int(v) for v in c["boundary"]),
            )
            for c in doc["clusters"]
        )
        super_edges = tuple(
            SuperEdgeRecord(
                cluster_id=int(s["cluster_id"]),
                b_i=int(s["b_i"]),
                b_j=int(s["b_j"]),
                c=CostVec(float(s["c"][0]), float(s["c"][1])),
                c_apex=CostVec(float(s["c_apex"][0]), float(s["c_apex"][1])),
                rep_path=tuple(int(v) for v in s["rep_path"])
                if s["rep_path"] is not None
                else None,
            )
            for s in doc["super_edges"]
        )
        art = PreprocArtifact(
            delta=float(doc["delta"]),
            eps=Eps(float(doc["eps"][0]), float(doc["eps"][1])),
            n_vertices=int(doc["n_vertices"]),
            fingerprint=str(doc["fingerprint"]),
            clusters=clusters,
            super_edges=super_edges,
        )
    except (KeyError, IndexError, TypeError) as e:
        raise ArtifactError(f"artifact is missing fields: {e}") from e
    art.validate()
    return art
