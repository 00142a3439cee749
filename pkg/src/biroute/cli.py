"""Command-line surface: convert, gen, preprocess, query, bench, selfcheck.

Exit codes: 0 success, 2 usage error (argparse), 3 data error.  Reports are
versioned JSON documents; bench output is CSV with a fixed header.  Paths
that are relative and do not exist as given are also tried under
$BIROUTE_DATA_DIR when it is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from .core import Eps
from . import graph_io
from .apex_search import GenGraph, search
from .clustering import RansacParams, delineate_clusters, ransac_detect_lines
from .graph_io import (
    ArtifactError,
    FormatError,
    PreprocArtifact,
    ClusterRecord,
    SuperEdgeRecord,
    SyntheticSpec,
)
from .icca import IccaStats, icca_cluster
from .oracle import exact_pareto
from .query import QueryGraphCache, solve

REPORT_SCHEMA = "biroute.report.v1"
BENCH_CSV_HEADER = [
    "instance",
    "query_index",
    "s",
    "t",
    "algo",
    "eps1",
    "eps2",
    "n_solutions",
    "expansions",
    "generations",
    "merges",
    "open_peak",
    "super_edge_insertions",
    "wall_ms",
    "speedup_vs_apex",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _resolve(path: str) -> str:
    if os.path.isabs(path) or os.path.exists(path):
        return path
    root = os.environ.get("BIROUTE_DATA_DIR")
    if root:
        candidate = os.path.join(root, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _parse_eps(text: str) -> Eps:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("eps must look like '0.01,0.01'")
    try:
        return Eps(float(parts[0]), float(parts[1]))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def validate_query_record(rec: dict) -> None:
    """Schema check for one per-query report record."""
    required = {
        "schema",
        "instance",
        "s",
        "t",
        "eps",
        "algorithm",
        "solutions",
        "expansions",
        "generations",
        "open_peak",
        "wall_ms",
    }
    missing = required - rec.keys()
    if missing:
        raise ValueError(f"query record missing fields: {sorted(missing)}")
    if rec["schema"] != REPORT_SCHEMA:
        raise ValueError(f"unexpected schema {rec['schema']}")
    for key in ("solutions", "expansions", "generations", "open_peak"):
        if rec[key] < 0:
            raise ValueError(f"negative counter {key}")
    if rec["wall_ms"] < 0:
        raise ValueError("negative wall time")


def validate_preprocess_record(rec: dict) -> None:
    """Schema check for one preprocessing report record."""
    required = {
        "schema",
        "n_vertices",
        "n_vertices_query_proxy",
        "n_edges",
        "n_super_edges",
        "n_clusters",
        "branching_factor",
        "branching_factor_query_proxy",
        "wall_s",
        "artifact_bytes",
        "fast_path_pairs",
        "fallback_pairs",
    }
    missing = required - rec.keys()
    if missing:
        raise ValueError(f"preprocess record missing fields: {sorted(missing)}")
    if rec["schema"] != REPORT_SCHEMA:
        raise ValueError(f"unexpected schema {rec['schema']}")
    for key in required - {"schema"}:
        if rec[key] < 0:
            raise ValueError(f"negative field {key}")


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_convert(args: argparse.Namespace) -> int:
    f1, f2 = _resolve(args.in1), _resolve(args.in2)
    if args.swap:
        f1, f2 = f2, f1
    g = graph_io.load_dimacs_pair(f1, f2)
    graph_io.save_graph(g, args.out)
    print(f"wrote {args.out}: {g.vertex_count} vertices, {g.edge_count} edges")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        n_vertices=args.vertices,
        topology=args.topology,
        n_lines=args.lines,
        delta_plant=args.delta_plant,
        rng_seed=args.seed,
    )
    g, truth = graph_io.generate_synthetic(spec)
    graph_io.save_graph(g, args.out)
    if args.truth:
        doc = {
            "format": "biroute.truth",
            "version": 1,
            "lines": [[ln.a, ln.b] for ln in truth.lines],
            "edge_line": list(truth.edge_line),
            "vertex_region": list(truth.vertex_region),
        }
        Path(args.truth).write_text(json.dumps(doc, sort_keys=True) + "\n")
    print(f"wrote {args.out}: {g.vertex_count} vertices, {g.edge_count} edges")
    return EXIT_OK


def _build_artifact(
    g: graph_io.BiGraph,
    delta: float,
    eps: Eps,
    params: RansacParams,
    n_min_vertices: int,
    jobs: int,
    keep_paths: bool,
) -> tuple[PreprocArtifact, object, IccaStats]:
    norm, _scales = graph_io.normalize_costs(g)
    lines = ransac_detect_lines(norm, params)
    clusters = delineate_clusters(norm, lines, delta, n_min_vertices=n_min_vertices)
    stats = IccaStats()
    super_edges: list[SuperEdgeRecord] = []
    records: list[ClusterRecord] = []
    for c in clusters.nontrivial():
        for se in icca_cluster(g, c, eps, keep_paths=keep_paths, jobs=jobs, stats=stats):
            super_edges.append(
                SuperEdgeRecord(
                    cluster_id=len(records),
                    b_i=se.b_i,
                    b_j=se.b_j,
                    c=se.c,
                    c_apex=se.c_apex,
                    rep_path=se.rep_path,
                )
            )
        records.append(
            ClusterRecord(
                id=len(records),
                line_a=c.line.a,
                line_b=c.line.b,
                vertices=tuple(sorted(c.vertices)),
                boundary=tuple(sorted(c.boundary)),
            )
        )
    artifact = PreprocArtifact(
        delta=delta,
        eps=eps,
        n_vertices=g.vertex_count,
        fingerprint=graph_io.graph_fingerprint(g, delta, eps),
        clusters=tuple(records),
        super_edges=tuple(super_edges),
    )
    return artifact, clusters, stats


def cmd_preprocess(args: argparse.Namespace) -> int:
    g = graph_io.load_graph(_resolve(args.graph))
    params = RansacParams(
        delta=args.delta,
        n_hypotheses=args.hypotheses,
        n_min_inliers=args.min_inliers,
        max_rounds=args.max_rounds,
        rng_seed=args.seed,
    )
    t0 = time.perf_counter()
    artifact, clusters, stats = _build_artifact(
        g,
        args.delta,
        args.eps,
        params,
        args.min_vertices,
        args.jobs,
        not args.no_paths,
    )
    wall_s = time.perf_counter() - t0
    graph_io.save_artifact(artifact, args.out)

    nontrivial = clusters.nontrivial()
    interior = sum(len(c.interior()) for c in nontrivial)
    interior_edges = sum(len(c.edges or ()) for c in nontrivial)
    n_v_proxy = g.vertex_count - interior
    n_e_proxy = g.edge_count - interior_edges + len(artifact.super_edges)
    report = {
        "schema": REPORT_SCHEMA,
        "n_vertices": g.vertex_count,
        "n_vertices_query_proxy": n_v_proxy,
        "n_edges": g.edge_count,
        "n_super_edges": len(artifact.super_edges),
        "n_clusters": len(nontrivial),
        "branching_factor": g.edge_count / max(1, g.vertex_count),
        "branching_factor_query_proxy": n_e_proxy / max(1, n_v_proxy),
        "wall_s": wall_s,
        "artifact_bytes": os.path.getsize(args.out),
        "fast_path_pairs": stats.fast_path_pairs,
        "fallback_pairs": stats.fallback_pairs,
    }
    validate_preprocess_record(report)
    _emit(report, args.report)
    return EXIT_OK


def _run_query(g, artifact, clusters, cache, s, t, eps, algo, with_paths):
    if algo == "exact":
        t0 = time.perf_counter()
        frontier = exact_pareto(g, s, t)
        wall = (time.perf_counter() - t0) * 1000.0
        return (
            [c.as_tuple() for c in frontier.costs()],
            [list(p.path) for p in frontier.paths] if with_paths else None,
            {"expansions": 0, "generations": 0, "merges": 0, "open_peak": 0,
             "super_edge_insertions": 0, "solutions": len(frontier), "wall_ms": wall,
             "insertions": 0},
        )
    if algo == "apex":
        gen = GenGraph.from_bigraph(g)
        sols, stats = search(gen, s, t, eps, mode="plain")
        paths = None
        if with_paths:
            from .apex_search import reconstruct_path

            paths = [reconstruct_path(p, gen) for p in sols.pairs]
        return [c.as_tuple() for c in sols.costs()], paths, stats.as_dict()
    mode = "plain" if algo == "gapex" else "partial_expansion"
    res = solve(g, clusters, artifact, s, t, eps, mode=mode, cache=cache,
                with_paths=with_paths)
    return [c.as_tuple() for c in res.costs], res.paths, res.stats.as_dict()


def cmd_query(args: argparse.Namespace) -> int:
    g = graph_io.load_graph(_resolve(args.graph))
    artifact = clusters = None
    if args.algo in ("gapex", "pe-gapex"):
        if not args.artifact:
            print("error: --artifact is required for gapex/pe-gapex", file=sys.stderr)
            return EXIT_USAGE
        artifact = graph_io.load_artifact(_resolve(args.artifact))
        clusters = artifact.cluster_set()
    costs, paths, stats = _run_query(
        g, artifact, clusters, None, args.s, args.t, args.eps, args.algo, args.paths
    )
    record = {
        "schema": REPORT_SCHEMA,
        "instance": args.graph,
        "s": args.s,
        "t": args.t,
        "eps": list(args.eps.as_tuple()),
        "algorithm": args.algo,
        "solutions": stats["solutions"],
        "expansions": stats["expansions"],
        "generations": stats["generations"],
        "open_peak": stats["open_peak"],
        "wall_ms": stats["wall_ms"],
        "costs": costs,
    }
    if paths is not None:
        record["paths"] = paths
    validate_query_record(record)
    _emit(record, args.out)
    return EXIT_OK


def _read_queries(path: str) -> list[tuple[int, int]]:
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 's t', got {raw!r}")
        out.append((int(parts[0]), int(parts[1])))
    return out


def cmd_bench(args: argparse.Namespace) -> int:
    g = graph_io.load_graph(_resolve(args.graph))
    algos = args.algos.split(",")
    known = {"apex", "gapex", "pe-gapex", "exact"}
    unknown = set(algos) - known
    if unknown:
        print(f"error: unknown algorithms {sorted(unknown)}", file=sys.stderr)
        return EXIT_USAGE
    artifact = clusters = None
    if {"gapex", "pe-gapex"} & set(algos):
        if not args.artifact:
            print("error: --artifact is required for gapex/pe-gapex", file=sys.stderr)
            return EXIT_USAGE
        artifact = graph_io.load_artifact(_resolve(args.artifact))
        clusters = artifact.cluster_set()
    queries = _read_queries(_resolve(args.queries))
    cache = QueryGraphCache()

    rows = []
    for qi, (s, t) in enumerate(queries):
        wall_apex: float | None = None
        for algo in algos:
            costs, _, stats = _run_query(
                g, artifact, clusters, cache, s, t, args.eps, algo, False
            )
            if algo == "apex":
                wall_apex = stats["wall_ms"]
            speedup = ""
            if wall_apex is not None and stats["wall_ms"] > 0:
                speedup = f"{wall_apex / stats['wall_ms']:.4f}"
            rows.append(
                [
                    args.graph,
                    qi,
                    s,
                    t,
                    algo,
                    args.eps.e1,
                    args.eps.e2,
                    stats["solutions"],
                    stats["expansions"],
                    stats["generations"],
                    stats["merges"],
                    stats["open_peak"],
                    stats["super_edge_insertions"],
                    f"{stats['wall_ms']:.3f}",
                    speedup,
                ]
            )
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_CSV_HEADER)
        writer.writerows(rows)
    print(f"wrote {args.out}: {len(rows)} rows")
    return EXIT_OK


def cmd_selfcheck(args: argparse.Namespace) -> int:
    del args
    sample_query = {
        "schema": REPORT_SCHEMA,
        "instance": "sample",
        "s": 0,
        "t": 1,
        "eps": [0.01, 0.01],
        "algorithm": "pe-gapex",
        "solutions": 1,
        "expansions": 2,
        "generations": 3,
        "open_peak": 2,
        "wall_ms": 0.1,
        "costs": [[1.0, 2.0]],
    }
    sample_pre = {
        "schema": REPORT_SCHEMA,
        "n_vertices": 4,
        "n_vertices_query_proxy": 4,
        "n_edges": 4,
        "n_super_edges": 0,
        "n_clusters": 0,
        "branching_factor": 1.0,
        "branching_factor_query_proxy": 1.0,
        "wall_s": 0.0,
        "artifact_bytes": 100,
        "fast_path_pairs": 0,
        "fallback_pairs": 0,
    }
    validate_query_record(sample_query)
    validate_preprocess_record(sample_pre)
    if BENCH_CSV_HEADER[0] != "instance" or "speedup_vs_apex" not in BENCH_CSV_HEADER:
        raise ValueError("bench CSV header drifted")
    print(f"schemas ok ({REPORT_SCHEMA}); bench header has {len(BENCH_CSV_HEADER)} columns")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biroute", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="pair two DIMACS .gr files into one graph")
    p.add_argument("--in1", required=True, help="objective-1 .gr file")
    p.add_argument("--in2", required=True, help="objective-2 .gr file")
    p.add_argument("--swap", action="store_true", help="swap objective order")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gen", help="generate a planted-correlation instance")
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--topology", choices=["grid", "random-regular"], default="grid")
    p.add_argument("--lines", type=int, default=2)
    p.add_argument("--delta-plant", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write planted ground truth JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("preprocess", help="detect clusters and build super-edges")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=_parse_eps, required=True)
    p.add_argument("--hypotheses", type=int, default=100)
    p.add_argument("--min-inliers", type=int, default=None)
    p.add_argument("--max-rounds", type=int, default=16)
    p.add_argument("--min-vertices", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-paths", action="store_true",
                   help="drop representative paths (smaller artifact, no path inlining)")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the report JSON here instead of stdout")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("query", help="answer one s->t query")
    p.add_argument("--graph", required=True)
    p.add_argument("--artifact")
    p.add_argument("-s", type=int, required=True)
    p.add_argument("-t", type=int, required=True)
    p.add_argument("--eps", type=_parse_eps, default=Eps(0.0, 0.0))
    p.add_argument("--algo", choices=["apex", "gapex", "pe-gapex", "exact"],
                   default="pe-gapex")
    p.add_argument("--paths", action="store_true", help="include vertex sequences")
    p.add_argument("--out")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run a query file under several algorithms")
    p.add_argument("--graph", required=True)
    p.add_argument("--artifact")
    p.add_argument("--queries", required=True, help="lines of 's t', '#' comments")
    p.add_argument("--eps", type=_parse_eps, required=True)
    p.add_argument("--algos", default="apex,pe-gapex")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selfcheck", help="validate report schemas and CSV header")
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ArtifactError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
