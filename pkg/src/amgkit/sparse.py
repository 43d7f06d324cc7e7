"""Sparse CSR / dense linear algebra primitives.

Vectors are plain 1-d float64 numpy arrays throughout the package; the only
custom containers are :class:`CsrMatrix` (square CSR with validated
structure) and :class:`DenseLu` (pivoted LU of the coarsest operator).
CsrMatrix instances are immutable after construction and safe to share.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse

from . import kernels


class SingularMatrixError(ValueError):
    """Raised when an LU factorization meets a zero pivot after pivoting."""


def _as_index_array(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _as_value_array(a):
    return np.ascontiguousarray(a, dtype=np.float64)


@dataclass(frozen=True)
class CsrMatrix:
    """Square sparse matrix in compressed sparse row format.

    Invariants (checked on construction): ``row_offsets`` is nondecreasing
    with ``n + 1`` entries, column indices lie in ``[0, n)`` and are strictly
    increasing within each row, and all values are finite.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "row_offsets", _as_index_array(self.row_offsets))
        object.__setattr__(self, "col_indices", _as_index_array(self.col_indices))
        object.__setattr__(self, "values", _as_value_array(self.values))
        self._validate()
        for arr in (self.row_offsets, self.col_indices, self.values):
            arr.setflags(write=False)

    def _validate(self):
        n, offs, cols, vals = self.n, self.row_offsets, self.col_indices, self.values
        if n < 0:
            raise ValueError("negative dimension")
        if offs.shape != (n + 1,):
            raise ValueError(f"row_offsets must have length {n + 1}, got {offs.shape}")
        if offs[0] != 0 or offs[-1] != cols.size or cols.size != vals.size:
            raise ValueError("row_offsets inconsistent with entry arrays")
        if np.any(np.diff(offs) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if cols.size:
            if cols.min() < 0 or cols.max() >= n:
                raise ValueError("column index out of range")
            rows = np.repeat(np.arange(n), np.diff(offs))
            if np.any((rows[1:] == rows[:-1]) & (np.diff(cols) <= 0)):
                raise ValueError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(vals)):
            raise ValueError("matrix values must be finite")

    @property
    def nnz(self):
        return self.col_indices.size

    @property
    def shape(self):
        return (self.n, self.n)

    def row(self, i):
        """(column indices, values) of row i as views."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def entry(self, i, j):
        """A[i, j], 0.0 if the entry is not stored."""
        cols, vals = self.row(i)
        k = np.searchsorted(cols, j)
        if k < cols.size and cols[k] == j:
            return float(vals[k])
        return 0.0

    def row_ids(self):
        """Row index of every stored entry (length nnz)."""
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_offsets))

    def diagonal(self):
        """Dense diagonal; missing diagonal entries count as zero."""
        d = np.zeros(self.n)
        rows = self.row_ids()
        mask = rows == self.col_indices
        d[rows[mask]] = self.values[mask]
        return d

    def to_dense(self):
        out = np.zeros((self.n, self.n))
        rows = self.row_ids()
        out[rows, self.col_indices] = self.values
        return out

    def transpose(self):
        rows = self.row_ids()
        return csr_from_coo(self.n, self.col_indices, rows, self.values)

    def mirror_values(self):
        """Per-entry values of the transposed positions: for entry (i, j)
        returns A[j, i], or 0.0 when (j, i) is not stored."""
        rows = self.row_ids()
        key = rows * self.n + self.col_indices
        mirror_key = self.col_indices * self.n + rows
        pos = np.searchsorted(key, mirror_key)
        pos_c = np.minimum(pos, key.size - 1)
        valid = (pos < key.size) & (key[pos_c] == mirror_key)
        out = np.zeros_like(self.values)
        out[valid] = self.values[pos_c[valid]]
        return out, valid


def csr_from_coo(n, rows, cols, values):
    """Build a CsrMatrix from coordinate triplets, summing duplicates."""
    rows = _as_index_array(rows)
    cols = _as_index_array(cols)
    values = _as_value_array(values)
    if not (rows.size == cols.size == values.size):
        raise ValueError("triplet arrays must have equal length")
    if rows.size:
        if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n:
            raise ValueError("triplet index out of range")
    order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], values[order]
    if r.size:
        new_group = np.empty(r.size, dtype=bool)
        new_group[0] = True
        new_group[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        gid = np.cumsum(new_group) - 1
        out_r = r[new_group]
        out_c = c[new_group]
        out_v = np.zeros(out_r.size)
        np.add.at(out_v, gid, v)
    else:
        out_r = r
        out_c = c
        out_v = v
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, out_r + 1, 1)
    np.cumsum(offsets, out=offsets)
    return CsrMatrix(n, offsets, out_c, out_v)


def csr_from_dense(dense, drop_tol=0.0):
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise ValueError("dense input must be square")
    rows, cols = np.nonzero(np.abs(dense) > drop_tol)
    return csr_from_coo(dense.shape[0], rows, cols, dense[rows, cols])


def spmv(A, x, out=None):
    """y = A @ x with row sums accumulated left to right."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}, vector is {x.shape}")
    if out is None:
        out = np.empty(A.n)
    kernels.csr_matvec(A.row_offsets, A.col_indices, A.values, x, out)
    return out


def residual(A, x, b, out=None):
    """r = b - A @ x."""
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.shape != (A.n,) or b.shape != (A.n,):
        raise ValueError("dimension mismatch in residual")
    if out is None:
        out = np.empty(A.n)
    kernels.csr_residual(A.row_offsets, A.col_indices, A.values, x, b, out)
    return out


@dataclass(frozen=True)
class DenseLu:
    """Pivoted dense LU factorization (coarse-level direct solver)."""

    lu: np.ndarray
    perm: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", self.lu.shape[0])


def dense_lu_factor(A):
    """Factor a dense square matrix with partial pivoting."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("LU factorization needs a square matrix")
    if A.shape[0] == 0:
        return DenseLu(np.zeros((0, 0)), np.zeros(0, dtype=np.int64))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.any(np.abs(np.diag(lu)) == 0.0):
        raise SingularMatrixError("zero pivot: matrix is singular")
    return DenseLu(lu, piv)


def dense_lu_solve(lu, b):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (lu.n,):
        raise ValueError("dimension mismatch in LU solve")
    if lu.n == 0:
        return b.copy()
    return scipy.linalg.lu_solve((lu.lu, lu.perm), b, check_finite=False)


def write_matrix_market(path, A):
    """Write a CsrMatrix as real general Matrix Market coordinates."""
    rows = A.row_ids()
    coo = scipy.sparse.coo_matrix((A.values, (rows, A.col_indices)), shape=A.shape)
    scipy.io.mmwrite(str(path), coo)


def read_matrix_market(path):
    m = scipy.io.mmread(str(path))
    m = scipy.sparse.coo_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix market file does not hold a square matrix")
    return csr_from_coo(m.shape[0], m.row, m.col, m.data)
