import numpy as np
import pytest

from amgkit import classify, compute_eta_max, csr_from_coo, csr_from_dense, edge_weight, vertex_weight
from amgkit.kernels import DIRICHLET, ISOLATED, REGULAR
from amgkit.strength import StrengthWarning

from conftest import grid2d_matrix, path_matrix, random_sym_m_matrix, stencil3d_matrix


def test_edge_weight_negative_entry():
    A = csr_from_dense(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    assert edge_weight(A, 0, 1) == 1.0


def test_edge_weight_positive_entry():
    A = csr_from_dense(np.array([[2.0, 0.5], [0.5, 2.0]]))
    assert edge_weight(A, 0, 1) == 0.0


def test_edge_weight_missing_entry_is_zero():
    A = csr_from_dense(np.diag([1.0, 1.0]))
    assert edge_weight(A, 0, 1) == 0.0


def test_vertex_weight_path_interior():
    assert vertex_weight(path_matrix(5), 2) == 2.0


def test_vertex_weight_3d_stencil_interior():
    A = stencil3d_matrix(3)
    center = 1 + 3 * (1 + 3 * 1)
    assert vertex_weight(A, center) == 6.0


def test_vertex_weight_identity_row():
    A = csr_from_dense(np.eye(2))
    assert vertex_weight(A, 0) == 1.0


def test_eta_max_path_interior():
    eta = compute_eta_max(path_matrix(5))
    assert eta[2] == pytest.approx(0.25, rel=1e-15)


def test_eta_max_positive_offdiagonals():
    A = csr_from_dense(np.array([[2.0, 0.5], [0.5, 2.0]]))
    assert np.array_equal(compute_eta_max(A), [0.0, 0.0])


def test_eta_max_isolated_row():
    A = csr_from_dense(np.diag([3.0, 3.0]))
    assert np.array_equal(compute_eta_max(A), [0.0, 0.0])


def test_classify_path_all_strong():
    A = path_matrix(9)
    prof = classify(A, delta=1.0 / 3.0)
    off = A.row_ids() != A.col_indices
    assert prof.strong[off].all()
    assert not prof.strong[~off].any()
    assert (prof.vertex_class == REGULAR).all()


def test_classify_anisotropic_grid():
    eps = 0.01
    A = grid2d_matrix(5, 5, eps_x=eps, eps_y=1.0)
    prof = classify(A, delta=1.0 / 3.0)
    rows = A.row_ids()
    horizontal = np.abs(rows - A.col_indices) == 1
    vertical = np.abs(rows - A.col_indices) == 5
    assert prof.strong[vertical].all()
    assert not prof.strong[horizontal].any()


def test_classify_all_positive_offdiagonals_isolated():
    dense = np.array([[2.0, 0.3, 0.0], [0.3, 2.0, 0.4], [0.0, 0.4, 2.0]])
    prof = classify(csr_from_dense(dense), beta=1e-5)
    assert (prof.vertex_class == ISOLATED).all()


def test_classify_dirichlet_overrides_isolated():
    dense = np.diag([1.0, 1.0, 2.0])
    dense[1, 2] = dense[2, 1] = -1.0
    prof = classify(csr_from_dense(dense))
    assert prof.vertex_class[0] == DIRICHLET
    assert prof.vertex_class[1] != DIRICHLET


def test_classify_rejects_bad_thresholds():
    A = path_matrix(3)
    with pytest.raises(ValueError):
        classify(A, delta=1.5)
    with pytest.raises(ValueError):
        classify(A, beta=0.0)


def test_classify_nonpositive_diagonal_forces_isolated():
    dense = np.array([[0.0, -1.0], [-1.0, 2.0]])
    with pytest.warns(StrengthWarning):
        prof = classify(csr_from_dense(dense))
    assert prof.vertex_class[0] == ISOLATED


def _transpose_flags(A, flags):
    rows = A.row_ids()
    out = np.zeros_like(flags)
    key = rows * A.n + A.col_indices
    mirror = A.col_indices * A.n + rows
    pos = np.searchsorted(key, mirror)
    out[:] = flags[pos]
    return out


def test_strength_properties_random_m_matrices(rng):
    for _ in range(100):
        n = int(rng.integers(4, 25))
        A = random_sym_m_matrix(rng, n)
        prof = classify(A, delta=1.0 / 3.0)
        # symmetry of strong flags
        assert np.array_equal(prof.strong, _transpose_flags(A, prof.strong))
        # all strong connections are two-way on symmetric input
        assert prof.one_way.sum() == 0
        # scale invariance under A -> 5A
        A5 = csr_from_coo(A.n, A.row_ids(), A.col_indices, 5.0 * A.values)
        prof5 = classify(A5, delta=1.0 / 3.0)
        assert np.array_equal(prof.strong, prof5.strong)
        assert np.array_equal(prof.vertex_class, prof5.vertex_class)
        # monotonicity: larger delta never adds strong edges
        prof_hi = classify(A, delta=0.8)
        assert not np.any(prof_hi.strong & ~prof.strong)


def test_positive_offdiagonals_never_strong(rng):
    for _ in range(20):
        n = int(rng.integers(4, 15))
        A = random_sym_m_matrix(rng, n)
        # flip the sign of some symmetric off-diagonal pairs
        dense = A.to_dense()
        idx = np.nonzero(np.triu(dense, 1))
        for k in range(0, len(idx[0]), 2):
            i, j = idx[0][k], idx[1][k]
            dense[i, j] = dense[j, i] = abs(dense[i, j])
        B = csr_from_dense(dense)
        prof = classify(B)
        rows = B.row_ids()
        positive_off = (B.values > 0) & (rows != B.col_indices)
        assert not prof.strong[positive_off].any()
