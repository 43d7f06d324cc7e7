"""Smoothers, the V-cycle preconditioner, and preconditioned BiCGSTAB."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hierarchy import prolongate, restrict
from .sparse import dense_lu_solve, residual

BREAKDOWN_TOL = 1.0e-60


class SmootherKind(enum.Enum):
    GS_FORWARD = "gs-forward"
    GS_BACKWARD = "gs-backward"
    SGS = "sgs"
    JACOBI = "jacobi"


@dataclass(frozen=True)
class SmootherSpec:
    kind: SmootherKind = SmootherKind.SGS
    steps: int = 1

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", SmootherKind(self.kind))
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    residual_history: list
    reduction: float
    breakdown: bool = False

    def history_csv(self):
        lines = ["iteration,residual_norm"]
        lines += [f"{k},{r:.16e}" for k, r in enumerate(self.residual_history)]
        return "\n".join(lines) + "\n"


def _check_diag(A):
    d = A.diagonal()
    if np.any(d == 0.0):
        raise ValueError(f"zero diagonal entry at row {int(np.argmin(d != 0.0))}")
    return d


def gauss_seidel_step(A, x, b, direction="forward"):
    """One Gauss-Seidel sweep over all rows, in place, returning x."""
    _check_diag(A)
    if x.shape != (A.n,) or b.shape != (A.n,):
        raise ValueError("dimension mismatch in Gauss-Seidel step")
    if direction == "forward":
        kernels.gs_sweep_forward(A.row_offsets, A.col_indices, A.values, x, b, A.n)
    elif direction == "backward":
        kernels.gs_sweep_backward(A.row_offsets, A.col_indices, A.values, x, b, A.n)
    else:
        raise ValueError(f"unknown sweep direction {direction!r}")
    return x


def smooth(A, x, b, spec, n_rows=None, diag=None):
    """Apply spec.steps sweeps of the chosen smoother to rows [0, n_rows).

    Rows at and beyond n_rows are treated as frozen unknowns: they are read
    but never updated, which makes this directly usable as the local solve
    of a hybrid (block-Jacobi across ranks) smoother.
    """
    nr = A.n if n_rows is None else n_rows
    offs, cols, vals = A.row_offsets, A.col_indices, A.values
    for _ in range(spec.steps):
        if spec.kind is SmootherKind.GS_FORWARD:
            kernels.gs_sweep_forward(offs, cols, vals, x, b, nr)
        elif spec.kind is SmootherKind.GS_BACKWARD:
            kernels.gs_sweep_backward(offs, cols, vals, x, b, nr)
        elif spec.kind is SmootherKind.SGS:
            kernels.gs_sweep_forward(offs, cols, vals, x, b, nr)
            kernels.gs_sweep_backward(offs, cols, vals, x, b, nr)
        else:
            if diag is None:
                diag = A.diagonal()
            x_new = np.empty_like(x)
            kernels.jacobi_sweep(offs, cols, vals, diag, x, b, x_new, nr)
            x[:nr] = x_new[:nr]
    return x


def vcycle(h, b, spec=SmootherSpec()):
    """One multigrid V-cycle applied to b (initial guess 0).

    A fixed linear operation: pre-smooth, restrict the residual, recurse
    (dense LU on the coarsest level), prolongate-and-add the correction,
    post-smooth.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (h.levels[0].A.n,):
        raise ValueError("right-hand side does not match the finest level")
    return _vcycle(h, 0, b, spec)


def _vcycle(h, l, b, spec):
    level = h.levels[l]
    if l == h.n_levels - 1:
        return dense_lu_solve(h.coarse_lu, b)
    x = np.zeros_like(b)
    smooth(level.A, x, b, spec, diag=level.diag)
    r = residual(level.A, x, b)
    bc = restrict(level.agg, r)
    xc = _vcycle(h, l + 1, bc, spec)
    x += prolongate(level.agg, xc)
    smooth(level.A, x, b, spec, diag=level.diag)
    return x


def vcycle_preconditioner(h, spec=SmootherSpec()):
    """The V-cycle as an apply-M callable for Krylov solvers."""
    _check_diag(h.levels[0].A)
    return lambda r: _vcycle(h, 0, r, spec)


def bicgstab(apply_op, b, precond=None, tol=1.0e-8, max_iter=500):
    """Right-preconditioned BiCGSTAB.

    Stops when ||r_k|| / ||r_0|| <= tol measured on the recursed residual;
    one iteration is a full step (two preconditioner and two operator
    applications).  Breakdown (|rho| or |omega| below 1e-60) is reported as
    non-converged with the breakdown flag; NaNs raise immediately.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=np.float64)
    if precond is None:
        precond = lambda r: r
    x = np.zeros_like(b)
    r = b.copy()
    nrm0 = math.sqrt(float(np.dot(r, r)))
    history = [nrm0]
    if nrm0 == 0.0:
        return x, SolveReport(0, True, history, 0.0)
    r0 = r.copy()
    rho_prev = 1.0
    alpha = 1.0
    omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    converged = False
    breakdown = False
    k = 0
    for k in range(1, max_iter + 1):
        rho = float(np.dot(r0, r))
        if abs(rho) < BREAKDOWN_TOL:
            breakdown = True
            break
        beta = (rho / rho_prev) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = precond(p)
        v = apply_op(p_hat)
        denom = float(np.dot(r0, v))
        if denom == 0.0:
            breakdown = True
            break
        alpha = rho / denom
        s = r - alpha * v
        ns = math.sqrt(float(np.dot(s, s)))
        if not np.isfinite(ns):
            raise FloatingPointError(f"non-finite residual at iteration {k}")
        if ns / nrm0 <= tol:
            x += alpha * p_hat
            history.append(ns)
            converged = True
            break
        s_hat = precond(s)
        t = apply_op(s_hat)
        tt = float(np.dot(t, t))
        if tt == 0.0:
            breakdown = True
            break
        omega = float(np.dot(t, s)) / tt
        x += alpha * p_hat + omega * s_hat
        r = s - omega * t
        nr = math.sqrt(float(np.dot(r, r)))
        if not np.isfinite(nr):
            raise FloatingPointError(f"non-finite residual at iteration {k}")
        history.append(nr)
        if nr / nrm0 <= tol:
            converged = True
            break
        if abs(omega) < BREAKDOWN_TOL:
            breakdown = True
            break
        rho_prev = rho
    report = SolveReport(
        iterations=k,
        converged=converged,
        residual_history=history,
        reduction=history[-1] / history[0],
        breakdown=breakdown,
    )
    return x, report
