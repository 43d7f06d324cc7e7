"""Model problem generators: cell-centered finite-volume discretizations of
diffusion on the unit cube.

Cells are numbered lexicographically (x fastest).  Interior faces carry the
transmissibility ``harmonic_mean(k_left, k_right) * h`` (face area h^2 over
distance h); Dirichlet boundary faces sit half a cell away, giving
``2 * k_cell * h`` with the boundary value folded into the right-hand side.
The resulting matrices are symmetric positive definite with positive
diagonal and nonpositive off-diagonals.
"""

from dataclasses import dataclass

import numpy as np

from .sparse import csr_from_coo

KIND_LAPLACE = "laplace"
KIND_POISSON_MMS = "poisson-mms"
KIND_HETERO = "hetero"
PROBLEM_KINDS = (KIND_LAPLACE, KIND_POISSON_MMS, KIND_HETERO)


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    cells_per_axis: int

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.cells_per_axis < 2:
            raise ValueError("cells_per_axis must be >= 2")

    @property
    def n(self):
        return self.cells_per_axis ** 3


@dataclass(frozen=True)
class CoefficientField:
    """Strictly positive scalar diffusion coefficient k(x, y, z).

    The callable must broadcast over numpy coordinate arrays.
    """

    fn: object

    def __call__(self, x, y, z):
        return self.fn(x, y, z)


def constant_field(value=1.0):
    if value <= 0:
        raise ValueError("coefficient must be positive")
    return CoefficientField(lambda x, y, z: np.full(np.broadcast(x, y, z).shape, float(value)))


def k_hetero(x, y=None, z=None):
    """Piecewise-constant coefficient: 1e3 inside the centered cube of width
    0.8, 1e-2 inside the eight corner cubes of width 0.1, and 1 elsewhere."""
    if y is None:
        x, y, z = x  # accept a point triple
    x = np.asarray(x)
    y = np.asarray(y)
    z = np.asarray(z)
    inner = (
        (x >= 0.1) & (x <= 0.9) & (y >= 0.1) & (y <= 0.9) & (z >= 0.1) & (z <= 0.9)
    )
    near = lambda c: (c <= 0.1) | (c >= 0.9)
    corner = near(x) & near(y) & near(z)
    out = np.ones(np.broadcast(x, y, z).shape)
    out = np.where(corner, 1.0e-2, out)
    out = np.where(inner, 1.0e3, out)
    return out if out.ndim else float(out)


hetero_field = CoefficientField(k_hetero)


def harmonic_mean(a, b):
    return 2.0 * a * b / (a + b)


def _cell_ids(m):
    ix, iy, iz = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    return ix + m * (iy + m * iz)


def _assemble_fv(m, kvals, f_cells, u_bnd):
    """Assemble the 7-point FV matrix and right-hand side.

    kvals, f_cells: arrays of shape (m, m, m) indexed [ix, iy, iz].
    u_bnd(x, y, z): Dirichlet value at a boundary-face center.
    """
    if np.any(kvals <= 0.0):
        bad = np.argwhere(kvals <= 0.0)[0]
        raise ValueError(f"non-positive diffusion coefficient at cell {tuple(bad)}")
    h = 1.0 / m
    n = m ** 3
    ids = _cell_ids(m)
    diag = np.zeros(n)
    rhs = (f_cells * h ** 3).ravel(order="F").astype(np.float64).copy()
    rows = []
    cols = []
    vals = []
    centers = (np.arange(m) + 0.5) * h

    for axis in range(3):
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[axis] = slice(0, m - 1)
        sl_hi[axis] = slice(1, m)
        k_lo = kvals[tuple(sl_lo)]
        k_hi = kvals[tuple(sl_hi)]
        T = harmonic_mean(k_lo, k_hi) * h
        left = ids[tuple(sl_lo)].ravel()
        right = ids[tuple(sl_hi)].ravel()
        tv = T.ravel()
        np.add.at(diag, left, tv)
        np.add.at(diag, right, tv)
        rows.append(left)
        cols.append(right)
        vals.append(-tv)
        rows.append(right)
        cols.append(left)
        vals.append(-tv)

        # Dirichlet faces at both ends of this axis
        for side, idx3 in ((0.0, 0), (1.0, m - 1)):
            sl = [slice(None)] * 3
            sl[axis] = idx3
            cells = ids[tuple(sl)].ravel()
            kb = kvals[tuple(sl)].ravel()
            Tb = 2.0 * kb * h
            np.add.at(diag, cells, Tb)
            other = [a for a in range(3) if a != axis]
            c0, c1 = np.meshgrid(centers, centers, indexing="ij")
            coords = [None, None, None]
            coords[axis] = np.full(c0.shape, side)
            coords[other[0]] = c0
            coords[other[1]] = c1
            ub = np.asarray(u_bnd(coords[0], coords[1], coords[2]), dtype=np.float64)
            np.add.at(rhs, cells, Tb * ub.ravel())

    all_rows = np.concatenate(rows + [np.arange(n, dtype=np.int64)])
    all_cols = np.concatenate(cols + [np.arange(n, dtype=np.int64)])
    all_vals = np.concatenate(vals + [diag])
    return csr_from_coo(n, all_rows, all_cols, all_vals), rhs


def _sample_cells(m, field):
    h = 1.0 / m
    c = (np.arange(m) + 0.5) * h
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    return np.asarray(field(x, y, z), dtype=np.float64), (x, y, z)


def gen_diffusion_fv(spec, k_field, f=None, u_bnd=None):
    """Diffusion matrix and rhs for a coefficient field.

    Defaults: unit source term, homogeneous Dirichlet boundary.
    """
    m = spec.cells_per_axis
    kvals, (x, y, z) = _sample_cells(m, k_field)
    if f is None:
        f_cells = np.ones((m, m, m))
    else:
        f_cells = np.asarray(f(x, y, z), dtype=np.float64)
    if u_bnd is None:
        u_bnd = lambda bx, by, bz: np.zeros(np.broadcast(bx, by, bz).shape)
    return _assemble_fv(m, kvals, f_cells, u_bnd)


def mms_solution(x, y, z):
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2 + np.asarray(z) ** 2
    return np.exp(-r2)


def mms_rhs(x, y, z):
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2 + np.asarray(z) ** 2
    return (6.0 - 4.0 * r2) * np.exp(-r2)


def gen_poisson_mms(spec):
    """Unit-coefficient problem with a manufactured solution.

    u = exp(-|x|^2) solves -lap(u) = (6 - 4 |x|^2) exp(-|x|^2); the Dirichlet
    data matches u on the boundary.  Returns (A, rhs, exact cell values).
    """
    m = spec.cells_per_axis
    A, rhs = gen_diffusion_fv(spec, constant_field(1.0), f=mms_rhs, u_bnd=mms_solution)
    _, (x, y, z) = _sample_cells(m, constant_field(1.0))
    exact = mms_solution(x, y, z).ravel(order="F")
    return A, rhs, exact


def generate(spec):
    """(A, rhs, exact-or-None) for a problem spec."""
    if spec.kind == KIND_LAPLACE:
        A, rhs = gen_diffusion_fv(spec, constant_field(1.0))
        return A, rhs, None
    if spec.kind == KIND_HETERO:
        A, rhs = gen_diffusion_fv(spec, hetero_field)
        return A, rhs, None
    A, rhs, exact = gen_poisson_mms(spec)
    return A, rhs, exact
