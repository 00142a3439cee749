"""Bi-objective shortest-path toolkit exploiting correlated edge costs.

Preprocess once (correlation-line detection, cluster delineation,
super-edge construction), then answer approximate Pareto-set queries with
a user-chosen factor eps; an exact frontier solver doubles as the oracle.
"""

from .core import CostVec, Eps, Line2D, dominates, eps_dominates, line_through, perp_distance
from .graph_io import (
    BiGraph,
    NormalizationScales,
    PreprocArtifact,
    SyntheticSpec,
    generate_synthetic,
    load_artifact,
    load_dimacs_pair,
    load_graph,
    normalize_costs,
    save_artifact,
    save_graph,
)
from .oracle import ExtremePair, FrontierSet, dijkstra, exact_pareto, extreme_pair
from .apex_search import (
    ApexPathPair,
    GenGraph,
    Heuristic,
    SearchStats,
    SolutionSet,
    build_heuristic,
    expand_pair,
    reconstruct_path,
    search,
    try_merge,
)
from .clustering import (
    Cluster,
    ClusterSet,
    RansacParams,
    conforming_lines,
    delineate_clusters,
    pearson,
    ransac_detect_lines,
)
from .icca import IccaStats, SuperEdge, icca_cluster, icca_pair
from .query import QueryGraph, QueryGraphCache, SolveResult, build_query_graph, solve

__version__ = "0.1.0"
