"""Reverse spatio-textual k-nearest-neighbor queries over a hierarchical index."""

from .core import (
    DatasetTooSmall,
    NonPositiveInput,
    NormStats,
    QueryObject,
    STObject,
    SimParams,
    TermVector,
    compute_norm_stats,
    euclidean_dist,
    extended_jaccard,
    fdim_ratio,
    sim_st,
)
from .engine import (
    CompletenessViolation,
    EngineAudit,
    EngineState,
    Mode,
    TraceEvent,
    faulty2011_query,
    faulty2014_query,
    final_verification,
    format_trace_table,
    rstknn_query,
    subtree_objects,
    trace_to_jsonl,
)
from .iur_tree import (
    EmptyDataset,
    Entry,
    IurTree,
    Mbr,
    build_tree,
    max_dist,
    max_sim_st,
    max_text_sim,
    min_dist,
    min_sim_st,
    min_text_sim,
    node_entry,
    object_entry,
    tree_from_layout,
)
from .nn_lists import NNLists, NNTuple, NotInternalNode, Verdict, is_hit_or_drop
from .oracle import (
    CounterexampleFixture,
    SandwichReport,
    check_bound_sandwich,
    counterexample_search,
    ej_dominance_counterexample,
    kth_nn_sim,
    rknn_bruteforce,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetTooSmall",
    "NonPositiveInput",
    "NormStats",
    "QueryObject",
    "STObject",
    "SimParams",
    "TermVector",
    "compute_norm_stats",
    "euclidean_dist",
    "extended_jaccard",
    "fdim_ratio",
    "sim_st",
    "CompletenessViolation",
    "EngineAudit",
    "EngineState",
    "Mode",
    "TraceEvent",
    "faulty2011_query",
    "faulty2014_query",
    "final_verification",
    "format_trace_table",
    "rstknn_query",
    "subtree_objects",
    "trace_to_jsonl",
    "EmptyDataset",
    "Entry",
    "IurTree",
    "Mbr",
    "build_tree",
    "max_dist",
    "max_sim_st",
    "max_text_sim",
    "min_dist",
    "min_sim_st",
    "min_text_sim",
    "node_entry",
    "object_entry",
    "tree_from_layout",
    "NNLists",
    "NNTuple",
    "NotInternalNode",
    "Verdict",
    "is_hit_or_drop",
    "CounterexampleFixture",
    "SandwichReport",
    "check_bound_sandwich",
    "counterexample_search",
    "ej_dominance_counterexample",
    "kth_nn_sim",
    "rknn_bruteforce",
]
