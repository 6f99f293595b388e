"""Packing trees T_2..T_k edge-disjointly into host graphs.

The main entry points are :func:`pack_constructive` (k-chromatic hosts, at
most three non-star trees), :func:`pack_exhaustive` (any host, bounded
search), the degree-based packers, and :func:`verify_packing`.
"""

from .coloring import OrderedColoring, check_grundy, chromatic_number, critical_subgraph, grundy_refine, peel_tail
from .constructive import (
    CompletionError,
    PackingPreconditionError,
    ReductionPlan,
    apply_reduction,
    pack_constructive,
    select_reduction,
)
from .degree import compute_b_sets, embed_tree_levelwise, pack_avg_degree, pack_min_degree, peel
from .graph import Graph, complete_graph, mycielski
from .packing import Packing
from .search import pack_exhaustive, sweep_chromatic, sweep_tpc
from .trees import Tree, TreeFamily, canonical_form, enumerate_free_trees, find_pending_stars
from .verify import VerifyReport, verify_packing

__version__ = "0.1.0"

__all__ = [
    "CompletionError",
    "Graph",
    "OrderedColoring",
    "Packing",
    "PackingPreconditionError",
    "ReductionPlan",
    "Tree",
    "TreeFamily",
    "VerifyReport",
    "apply_reduction",
    "canonical_form",
    "check_grundy",
    "chromatic_number",
    "complete_graph",
    "compute_b_sets",
    "critical_subgraph",
    "embed_tree_levelwise",
    "enumerate_free_trees",
    "find_pending_stars",
    "grundy_refine",
    "mycielski",
    "pack_avg_degree",
    "pack_constructive",
    "pack_exhaustive",
    "pack_min_degree",
    "peel",
    "peel_tail",
    "select_reduction",
    "sweep_chromatic",
    "sweep_tpc",
    "verify_packing",
]
