"""Deterministic virtual-rank simulation of the distributed solver.

Ranks are simulated in a fixed round-robin schedule inside one process.
Rank-local data only moves through :class:`VirtualComm` exchanges with
barrier semantics (all sends complete before any receive), so the observable
behaviour matches a message-passing execution.
"""

from .decomp import (
    COPY,
    OWNER,
    ConsistencyError,
    Distribution,
    ParallelIndexSet,
    RankState,
    VirtualComm,
    add_reduce,
    assert_consistent,
    build_overlap,
    build_rank_states,
    gather_vector,
    hybrid_smoother_step,
    localize_matrix,
    make_consistent,
    parallel_spmv,
    partition_fine,
    rank_grid_for,
    scatter_vector,
)
from .multigrid import (
    ParallelHierarchy,
    Redistribution,
    agglomerate,
    assemble_global_matrix,
    comm_stats_json,
    gather_solution,
    parallel_aggregation,
    parallel_bicgstab,
    parallel_build_hierarchy,
    parallel_vcycle,
    trigger_agglomeration,
)

__all__ = [
    "COPY",
    "OWNER",
    "ConsistencyError",
    "Distribution",
    "ParallelIndexSet",
    "ParallelHierarchy",
    "RankState",
    "Redistribution",
    "VirtualComm",
    "add_reduce",
    "agglomerate",
    "assemble_global_matrix",
    "assert_consistent",
    "build_overlap",
    "build_rank_states",
    "comm_stats_json",
    "gather_solution",
    "gather_vector",
    "hybrid_smoother_step",
    "localize_matrix",
    "make_consistent",
    "parallel_aggregation",
    "parallel_bicgstab",
    "parallel_build_hierarchy",
    "parallel_spmv",
    "parallel_vcycle",
    "partition_fine",
    "rank_grid_for",
    "scatter_vector",
    "trigger_agglomeration",
]
