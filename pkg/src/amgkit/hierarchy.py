"""Multilevel operator hierarchy: piecewise-constant transfer operators,
over-corrected Galerkin coarse matrices, and termination control.

The prolongation never exists as an explicit matrix; an aggregates map *is*
the operator (every fine vertex copies its aggregate's coarse value, the
restriction sums over aggregate members).
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .aggregation import AggregatesMap, AggregationParams, aggregate
from .sparse import CsrMatrix, DenseLu, csr_from_coo, dense_lu_factor
from .strength import classify

STAGNATION_RATIO = 0.9


class HierarchyError(RuntimeError):
    """Raised when a hierarchy cannot be completed."""


@dataclass
class Level:
    """One level of the hierarchy: its operator and, unless it is the
    coarsest, the aggregates map down to the next level."""

    A: CsrMatrix
    agg: AggregatesMap | None = None
    diag: np.ndarray | None = None

    @property
    def n_fine(self):
        return self.A.n

    @property
    def n_coarse(self):
        return self.agg.n_aggregates if self.agg is not None else 0


@dataclass(frozen=True)
class ComplexityReport:
    operator_complexity: float
    grid_complexity: float
    levels: int


@dataclass
class Hierarchy:
    """Ordered levels (finest first) plus the coarse-level factorization."""

    levels: list
    coarse_lu: DenseLu
    omega: float
    params: AggregationParams
    stats: dict = field(default_factory=dict)

    @property
    def n_levels(self):
        return len(self.levels)

    def complexity(self):
        nnz0 = self.levels[0].A.nnz
        n0 = self.levels[0].A.n
        return ComplexityReport(
            operator_complexity=sum(l.A.nnz for l in self.levels) / nnz0,
            grid_complexity=sum(l.A.n for l in self.levels) / n0,
            levels=self.n_levels,
        )

    def stats_json(self):
        """Per-level size statistics as a JSON string."""
        rep = self.complexity()
        payload = {
            "levels": [
                {"level": l, "n": lev.A.n, "nnz": lev.A.nnz}
                for l, lev in enumerate(self.levels)
            ],
            "operator_complexity": rep.operator_complexity,
            "grid_complexity": rep.grid_complexity,
            "build_seconds": self.stats.get("build_seconds"),
            "termination": self.stats.get("termination"),
        }
        return json.dumps(payload, indent=2)


def prolongate(agg, coarse, n_fine=None):
    """Inject each aggregate's coarse value into its fine members.

    Dirichlet (unaggregated) vertices receive 0.
    """
    coarse = np.asarray(coarse, dtype=np.float64)
    if coarse.shape != (agg.n_aggregates,):
        raise ValueError("coarse vector does not match the aggregate count")
    if n_fine is None:
        n_fine = agg.n_fine
    out = np.zeros(n_fine)
    mask = agg.agg_of >= 0
    out[mask] = coarse[agg.agg_of[mask]]
    return out


def restrict(agg, fine):
    """Transpose of :func:`prolongate`: sum fine values over each aggregate."""
    fine = np.asarray(fine, dtype=np.float64)
    if fine.shape != (agg.n_fine,):
        raise ValueError("fine vector does not match the aggregates map")
    mask = agg.agg_of >= 0
    return np.bincount(agg.agg_of[mask], weights=fine[mask],
                       minlength=agg.n_aggregates).astype(np.float64)


def galerkin_product(A_fine, agg, omega=1.6):
    """Coarse operator (1/omega) * P^T A P for piecewise-constant P.

    Computed in one pass over the fine nonzeros: every entry (k, l) lands on
    coarse position (agg(k), agg(l)); duplicates merge by summation.
    Entries touching unaggregated (Dirichlet) vertices are dropped.
    """
    if agg.n_fine != A_fine.n:
        raise ValueError("aggregates map does not match the matrix")
    return galerkin_map(A_fine, agg.agg_of, agg.n_aggregates, omega)


def galerkin_map(A_fine, coarse_of, n_coarse, omega):
    """Galerkin product for an arbitrary fine->coarse index map (-1 drops)."""
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    rows = coarse_of[A_fine.row_ids()]
    cols = coarse_of[A_fine.col_indices]
    mask = (rows >= 0) & (cols >= 0)
    return csr_from_coo(n_coarse, rows[mask], cols[mask], A_fine.values[mask] / omega)


def build_hierarchy(A, params=None, omega=1.6, coarse_target=1000, max_levels=25):
    """Repeat classify -> aggregate -> Galerkin until the level is small
    enough for a direct solver, the level cap is reached, or coarsening
    stagnates; then factor the coarsest operator densely."""
    if params is None:
        params = AggregationParams()
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    t0 = time.perf_counter()
    levels = []
    current = A
    termination = "coarse_target"
    while True:
        diag = current.diagonal()
        if np.any(diag == 0.0):
            lvl = len(levels)
            raise HierarchyError(f"zero diagonal entry on level {lvl}")
        levels.append(Level(A=current, diag=diag))
        if current.n <= coarse_target:
            break
        if len(levels) >= max_levels:
            termination = "max_levels"
            break
        profile = classify(current, params.delta, params.beta)
        agg = aggregate(current, profile, params)
        if agg.n_aggregates == 0 or agg.n_aggregates > STAGNATION_RATIO * current.n:
            termination = "stagnation"
            break
        levels[-1].agg = agg
        current = galerkin_map(current, agg.agg_of, agg.n_aggregates, omega)
    try:
        coarse_lu = dense_lu_factor(levels[-1].A.to_dense())
    except ValueError as exc:
        raise HierarchyError(
            f"coarsest matrix (level {len(levels) - 1}) could not be factored: {exc}"
        ) from exc
    stats = {
        "build_seconds": time.perf_counter() - t0,
        "termination": termination,
        "level_sizes": [(lev.A.n, lev.A.nnz) for lev in levels],
    }
    return Hierarchy(levels, coarse_lu, float(omega), params, stats)
