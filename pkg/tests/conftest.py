"""Shared matrix builders and independent oracles for the test-suite.

Everything here is deliberately naive (dense arithmetic, explicit loops,
BFS) so it can serve as an oracle for the optimized library paths.
"""

import numpy as np
import pytest

from amgkit import csr_from_coo, csr_from_dense


def path_matrix(n, off=-1.0, diag=2.0):
    """1-d Laplacian tridiag(off, diag, off)."""
    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(i)
        cols.append(i)
        vals.append(diag)
        if i > 0:
            rows.append(i)
            cols.append(i - 1)
            vals.append(off)
        if i < n - 1:
            rows.append(i)
            cols.append(i + 1)
            vals.append(off)
    return csr_from_coo(n, rows, cols, vals)


def graph_laplacian(edges, n):
    """Zero-row-sum Laplacian of an undirected graph (unit edge weights)."""
    dense = np.zeros((n, n))
    for i, j in edges:
        dense[i, j] -= 1.0
        dense[j, i] -= 1.0
        dense[i, i] += 1.0
        dense[j, j] += 1.0
    return csr_from_dense(dense)


def weighted_graph_matrix(edges, n, extra_diag=0.0):
    """Symmetric matrix from (i, j, value) edge triples; the diagonal is the
    absolute row sum plus extra_diag (an M-matrix when values are <= 0)."""
    dense = np.zeros((n, n))
    for i, j, v in edges:
        dense[i, j] = v
        dense[j, i] = v
    d = np.abs(dense).sum(axis=1) + extra_diag
    np.fill_diagonal(dense, d)
    return csr_from_dense(dense)


def grid2d_matrix(nx, ny, eps_x=1.0, eps_y=1.0):
    """5-point stencil on an nx-by-ny grid with anisotropic couplings."""
    def vid(i, j):
        return i + nx * j

    n = nx * ny
    rows, cols, vals = [], [], []
    for j in range(ny):
        for i in range(nx):
            v = vid(i, j)
            rows.append(v)
            cols.append(v)
            vals.append(2.0 * eps_x + 2.0 * eps_y)
            for di, dj, c in ((1, 0, -eps_x), (-1, 0, -eps_x), (0, 1, -eps_y), (0, -1, -eps_y)):
                ii, jj = i + di, j + dj
                if 0 <= ii < nx and 0 <= jj < ny:
                    rows.append(v)
                    cols.append(vid(ii, jj))
                    vals.append(c)
    return csr_from_coo(n, rows, cols, vals)


def stencil3d_matrix(m):
    """7-point stencil, unit couplings: diag 6, off-diagonals -1."""
    def vid(i, j, k):
        return i + m * (j + m * k)

    rows, cols, vals = [], [], []
    for k in range(m):
        for j in range(m):
            for i in range(m):
                v = vid(i, j, k)
                rows.append(v)
                cols.append(v)
                vals.append(6.0)
                for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                    ii, jj, kk = i + d[0], j + d[1], k + d[2]
                    if 0 <= ii < m and 0 <= jj < m and 0 <= kk < m:
                        rows.append(v)
                        cols.append(vid(ii, jj, kk))
                        vals.append(-1.0)
    return csr_from_coo(m ** 3, rows, cols, vals)


def random_sym_m_matrix(rng, n, extra_nnz=2):
    """Random symmetric M-matrix: negative off-diagonals on a connected
    random pattern, diagonal = |row sum| * (1 + jitter)."""
    dense = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):  # spanning path keeps it connected
        w = -rng.uniform(0.1, 2.0)
        dense[a, b] = w
        dense[b, a] = w
    for _ in range(extra_nnz * n):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            w = -rng.uniform(0.1, 2.0)
            dense[i, j] = w
            dense[j, i] = w
    d = np.abs(dense).sum(axis=1) * (1.0 + rng.uniform(0.0, 0.5, size=n)) + 0.1
    np.fill_diagonal(dense, d)
    return csr_from_dense(dense)


def random_spd_dense(rng, n):
    B = rng.standard_normal((n, n))
    return B @ B.T + n * np.eye(n)


def random_valid_agg_map(rng, n):
    """Random surjective vertex -> aggregate map (no Dirichlet vertices)."""
    n_agg = int(rng.integers(1, max(2, n // 2 + 1)))
    agg_of = rng.integers(0, n_agg, size=n)
    agg_of[rng.permutation(n)[:n_agg]] = np.arange(n_agg)  # every id non-empty
    seeds = np.array([int(np.nonzero(agg_of == a)[0][0]) for a in range(n_agg)])
    sizes = np.bincount(agg_of, minlength=n_agg)
    return agg_of.astype(np.int64), seeds.astype(np.int64), sizes.astype(np.int64)


def dense_galerkin(A_dense, agg_of, n_agg, omega):
    """Oracle: explicit P^T A P / omega with a dense P."""
    n = A_dense.shape[0]
    P = np.zeros((n, n_agg))
    for v in range(n):
        if agg_of[v] >= 0:
            P[v, agg_of[v]] = 1.0
    return P.T @ A_dense @ P / omega


def bfs_diameter_dense(A, members):
    """Oracle diameter of an induced subgraph by all-pairs BFS."""
    members = list(members)
    local = {v: k for k, v in enumerate(members)}
    adj = [[] for _ in members]
    for k, v in enumerate(members):
        cols, _ = A.row(int(v))
        for j in cols:
            lj = local.get(int(j))
            if lj is not None and lj != k:
                adj[k].append(lj)
    worst = 0
    for src in range(len(members)):
        dist = {src: 0}
        queue = [src]
        while queue:
            u = queue.pop(0)
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if len(dist) != len(members):
            return -1
        worst = max(worst, max(dist.values()))
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
