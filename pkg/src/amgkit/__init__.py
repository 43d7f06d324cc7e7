"""Aggregation-based algebraic multigrid preconditioner and a deterministic
virtual-rank simulator of its parallel decomposition."""

from .aggregation import AggregatesMap, AggregationParams, aggregate, check_aggregates
from .experiments import ProblemSpec, RunReport, SolverConfig, report_emit, run_experiment
from .hierarchy import (
    ComplexityReport,
    Hierarchy,
    HierarchyError,
    Level,
    build_hierarchy,
    galerkin_product,
    prolongate,
    restrict,
)
from .problems import (
    CoefficientField,
    constant_field,
    gen_diffusion_fv,
    gen_poisson_mms,
    hetero_field,
    k_hetero,
)
from .solvers import (
    SmootherKind,
    SmootherSpec,
    SolveReport,
    bicgstab,
    gauss_seidel_step,
    smooth,
    vcycle,
    vcycle_preconditioner,
)
from .sparse import (
    CsrMatrix,
    DenseLu,
    SingularMatrixError,
    csr_from_coo,
    csr_from_dense,
    dense_lu_factor,
    dense_lu_solve,
    read_matrix_market,
    residual,
    spmv,
    write_matrix_market,
)
from .strength import StrengthProfile, classify, compute_eta_max, edge_weight, vertex_weight

__version__ = "0.1.0"

__all__ = [
    "AggregatesMap",
    "AggregationParams",
    "CoefficientField",
    "ComplexityReport",
    "CsrMatrix",
    "DenseLu",
    "Hierarchy",
    "HierarchyError",
    "Level",
    "ProblemSpec",
    "RunReport",
    "SingularMatrixError",
    "SmootherKind",
    "SmootherSpec",
    "SolveReport",
    "SolverConfig",
    "StrengthProfile",
    "aggregate",
    "bicgstab",
    "build_hierarchy",
    "check_aggregates",
    "classify",
    "compute_eta_max",
    "constant_field",
    "csr_from_coo",
    "csr_from_dense",
    "dense_lu_factor",
    "dense_lu_solve",
    "edge_weight",
    "galerkin_product",
    "gauss_seidel_step",
    "gen_diffusion_fv",
    "gen_poisson_mms",
    "hetero_field",
    "k_hetero",
    "prolongate",
    "read_matrix_market",
    "report_emit",
    "residual",
    "restrict",
    "run_experiment",
    "smooth",
    "spmv",
    "vcycle",
    "vcycle_preconditioner",
    "vertex_weight",
    "write_matrix_market",
]
