"""Experiment runner and report formatting.

A run builds the (possibly distributed) hierarchy for one model problem,
solves it with V-cycle-preconditioned BiCGSTAB, and reports the level count,
iterations, complexities, and phase timings.  Timings are informational
only; they are never part of pass/fail decisions.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .aggregation import AggregationParams
from .hierarchy import build_hierarchy
from .problems import ProblemSpec, generate
from .solvers import SmootherSpec, bicgstab, vcycle_preconditioner
from .sparse import residual, spmv
from . import parallel as par

REPORT_COLUMNS = ("procs", "h_inv", "levels", "build_s", "solve_s",
                  "iterations", "s_per_it", "total_s")


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 1.0 / 3.0
    beta: float = 1.0e-5
    s_min: int = 4
    s_max: int = 6
    d_max: int = 2
    omega: float = 1.6
    smoother: str = "sgs"
    steps: int = 1
    tol: float = 1.0e-8
    max_iter: int = 200
    coarse_target: int = 1000
    max_levels: int = 25

    def aggregation_params(self):
        return AggregationParams(
            s_min=self.s_min, s_max=self.s_max, d_max=self.d_max,
            delta=self.delta, beta=self.beta,
        )

    def smoother_spec(self):
        return SmootherSpec(kind=self.smoother, steps=self.steps)


@dataclass
class RunReport:
    problem: str
    cells_per_axis: int
    ranks: int
    levels: int
    iterations: int
    converged: bool
    operator_complexity: float
    grid_complexity: float
    build_seconds: float
    solve_seconds: float
    seconds_per_iteration: float
    final_reduction: float
    parameters: dict = field(default_factory=dict)
    residual_history: list = field(default_factory=list)

    @property
    def total_seconds(self):
        return self.build_seconds + self.solve_seconds

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def run_experiment(spec, config=None, ranks=1, agglomerate_at=None):
    """Build, solve, and report one experiment; returns (RunReport, x, extras).

    extras carries the objects tests want to poke at: the hierarchy (or
    parallel hierarchy), the matrix, and the rhs.
    """
    if config is None:
        config = SolverConfig()
    spec = spec if isinstance(spec, ProblemSpec) else ProblemSpec(*spec)
    A, rhs, exact = generate(spec)
    params = config.aggregation_params()
    smoother = config.smoother_spec()
    extras = {"A": A, "rhs": rhs, "exact": exact}

    if ranks == 1:
        t0 = time.perf_counter()
        h = build_hierarchy(A, params, omega=config.omega,
                            coarse_target=config.coarse_target,
                            max_levels=config.max_levels)
        t_build = time.perf_counter() - t0
        precond = vcycle_preconditioner(h, smoother)
        t0 = time.perf_counter()
        x, rep = bicgstab(lambda v: spmv(A, v), rhs, precond=precond,
                          tol=config.tol, max_iter=config.max_iter)
        t_solve = time.perf_counter() - t0
        comp = h.complexity()
        levels = h.n_levels
        oc, gc = comp.operator_complexity, comp.grid_complexity
        extras["hierarchy"] = h
    else:
        dist = par.partition_fine(spec.cells_per_axis, par.rank_grid_for(ranks))
        t0 = time.perf_counter()
        ph = par.parallel_build_hierarchy(
            A, dist, params, omega=config.omega,
            coarse_target=config.coarse_target, max_levels=config.max_levels,
            agglomerate_at=agglomerate_at,
        )
        t_build = time.perf_counter() - t0
        bs = par.scatter_vector(ph.levels[0].states, dist, rhs)
        t0 = time.perf_counter()
        xs, rep = par.parallel_bicgstab(ph, bs, tol=config.tol,
                                        max_iter=config.max_iter, spec=smoother)
        t_solve = time.perf_counter() - t0
        x = par.gather_solution(ph, xs)
        comp = ph.complexity()
        levels = comp["levels"]
        oc, gc = comp["operator_complexity"], comp["grid_complexity"]
        extras["hierarchy"] = ph

    report = RunReport(
        problem=spec.kind,
        cells_per_axis=spec.cells_per_axis,
        ranks=ranks,
        levels=levels,
        iterations=rep.iterations,
        converged=rep.converged,
        operator_complexity=float(oc),
        grid_complexity=float(gc),
        build_seconds=t_build,
        solve_seconds=t_solve,
        seconds_per_iteration=t_solve / max(rep.iterations, 1),
        final_reduction=rep.reduction,
        parameters={**asdict(config), "problem": spec.kind,
                    "cells": spec.cells_per_axis, "ranks": ranks},
        residual_history=list(rep.residual_history),
    )
    extras["solve_report"] = rep
    extras["true_reduction"] = _true_reduction(A, x, rhs)
    return report, x, extras


def _true_reduction(A, x, b):
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return 0.0
    return float(np.linalg.norm(residual(A, x, b))) / nb


def report_emit(report, fmt="table"):
    """Render a RunReport as csv, json, or a fixed-width table."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2)
    row = (
        report.ranks,
        report.cells_per_axis,
        report.levels,
        report.build_seconds,
        report.solve_seconds,
        report.iterations,
        report.seconds_per_iteration,
        report.total_seconds,
    )
    if fmt == "csv":
        header = ",".join(REPORT_COLUMNS)
        cells = [
            str(row[0]), str(row[1]), str(row[2]),
            f"{row[3]:.4g}", f"{row[4]:.4g}", str(row[5]),
            f"{row[6]:.4g}", f"{row[7]:.4g}",
        ]
        return header + "\n" + ",".join(cells) + "\n"
    if fmt == "table":
        names = ("procs", "1/h", "lev", "TB", "TS", "It", "TIt", "TT")
        cells = [
            str(row[0]), str(row[1]), str(row[2]),
            f"{row[3]:.4g}", f"{row[4]:.4g}", str(row[5]),
            f"{row[6]:.4g}", f"{row[7]:.4g}",
        ]
        widths = [max(len(n), len(c)) for n, c in zip(names, cells)]
        head = "  ".join(n.rjust(w) for n, w in zip(names, widths))
        body = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
        return head + "\n" + body + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
