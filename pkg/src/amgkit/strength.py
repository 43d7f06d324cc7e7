"""Strength-of-connection classification of matrix graph edges and vertices.

Edge weights are ``max(0, -A_ij)`` (positive off-diagonals never couple),
vertex weights are the diagonal entries, and an edge is *strong* when its
scaled two-sided weight product exceeds ``delta`` times the smaller of the
endpoint maxima.  Vertices whose best scaled connection falls below ``beta``
are *isolated*; vertices without any off-diagonal coupling at all (in row or
column) are *Dirichlet*.

All quantities are ratios of weights, so the classification is invariant
under scaling the matrix by a positive constant.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import DIRICHLET, ISOLATED, REGULAR


class StrengthWarning(UserWarning):
    """Diagnostic for vertices that cannot be classified cleanly."""


@dataclass(frozen=True)
class StrengthProfile:
    """Edge and vertex classification of one matrix.

    ``strong`` / ``strong_rev`` are aligned with the CSR entries of the
    matrix (diagonal positions are always False); ``strong_rev[e]`` tells
    whether the transposed edge is stored and strong, which is what
    separates two-way from one-way strong connections.
    """

    strong: np.ndarray
    strong_rev: np.ndarray
    eta_max: np.ndarray
    vertex_class: np.ndarray
    delta: float
    beta: float

    @property
    def two_way(self):
        return self.strong & self.strong_rev

    @property
    def one_way(self):
        return self.strong & ~self.strong_rev

    def n_isolated(self):
        return int(np.count_nonzero(self.vertex_class == ISOLATED))

    def n_dirichlet(self):
        return int(np.count_nonzero(self.vertex_class == DIRICHLET))


def edge_weight(A, i, j):
    """Weight of edge (i, j): 0 for positive entries, |A_ij| otherwise.

    A missing entry has weight 0.
    """
    v = A.entry(i, j)
    return 0.5 * (abs(v) - v)


def vertex_weight(A, i):
    """Weight of vertex i: the diagonal entry A_ii (0 when unstored)."""
    return A.entry(i, i)


def _edge_products(A):
    """Per-entry scaled products w_E(i,j) * w_E(j,i) / (w_V(i) * w_V(j)),
    plus the row-id array and the off-diagonal mask.  Entries touching a
    vertex with non-positive weight get product 0 and flag that vertex."""
    rows = A.row_ids()
    offdiag = rows != A.col_indices
    diag = A.diagonal()
    bad = diag <= 0.0
    mirror, _ = A.mirror_values()
    w_here = 0.5 * (np.abs(A.values) - A.values)
    w_there = 0.5 * (np.abs(mirror) - mirror)
    denom = diag[rows] * diag[A.col_indices]
    prod = np.zeros_like(A.values)
    ok = offdiag & (denom > 0.0) & ~bad[rows] & ~bad[A.col_indices]
    prod[ok] = w_here[ok] * w_there[ok] / denom[ok]
    return prod, rows, offdiag, bad


def compute_eta_max(A):
    """Best scaled connection per vertex (0 for an empty neighbourhood)."""
    prod, rows, offdiag, _ = _edge_products(A)
    eta = np.zeros(A.n)
    np.maximum.at(eta, rows[offdiag], prod[offdiag])
    return eta


def classify(A, delta=1.0 / 3.0, beta=1.0e-5):
    """Classify edges (strong/weak) and vertices (regular/isolated/Dirichlet).

    Ties at the threshold count as weak.  Dirichlet status overrides the
    isolated test; a non-positive diagonal forces the vertex isolated and
    emits a :class:`StrengthWarning`.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")

    prod, rows, offdiag, bad = _edge_products(A)
    eta = np.zeros(A.n)
    np.maximum.at(eta, rows[offdiag], prod[offdiag])

    thresh = delta * np.minimum(eta[rows], eta[A.col_indices])
    strong = offdiag & (prod > thresh)

    key = rows * A.n + A.col_indices
    mirror_key = A.col_indices * A.n + rows
    pos = np.searchsorted(key, mirror_key)
    pos_c = np.minimum(pos, max(key.size - 1, 0))
    stored_rev = (pos < key.size) & (key.size > 0)
    if key.size:
        stored_rev &= key[pos_c] == mirror_key
    strong_rev = np.zeros_like(strong)
    strong_rev[stored_rev] = strong[pos_c[stored_rev]]

    nonzero_off = offdiag & (A.values != 0.0)
    row_deg = np.bincount(rows[nonzero_off], minlength=A.n)
    col_deg = np.bincount(A.col_indices[nonzero_off], minlength=A.n)
    dirichlet = (row_deg == 0) & (col_deg == 0)

    vclass = np.full(A.n, REGULAR, dtype=np.int64)
    vclass[eta < beta] = ISOLATED
    vclass[dirichlet] = DIRICHLET
    if np.any(bad):
        idx = np.nonzero(bad)[0]
        warnings.warn(
            f"{idx.size} vertices have non-positive diagonal entries "
            f"(first: {idx[0]}); forcing them isolated",
            StrengthWarning,
            stacklevel=2,
        )
        vclass[bad] = ISOLATED

    return StrengthProfile(strong, strong_rev, eta, vclass, float(delta), float(beta))
