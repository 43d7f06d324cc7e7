import numpy as np
import pytest

from amgkit import (
    CsrMatrix,
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

from conftest import path_matrix, random_spd_dense


def test_spmv_identity():
    A = csr_from_dense(np.eye(3))
    assert np.array_equal(spmv(A, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_spmv_tridiag_constant():
    A = path_matrix(3)
    assert np.array_equal(spmv(A, np.ones(3)), [1.0, 0.0, 1.0])


def test_spmv_random_vs_dense_oracle(rng):
    for _ in range(20):
        dense = rng.standard_normal((5, 5))
        dense[np.abs(dense) < 0.4] = 0.0
        np.fill_diagonal(dense, rng.uniform(1.0, 2.0, 5))
        A = csr_from_dense(dense)
        x = rng.standard_normal(5)
        expected = dense @ x
        got = spmv(A, x)
        assert np.allclose(got, expected, rtol=1e-14, atol=1e-14)


def test_spmv_dimension_mismatch():
    A = path_matrix(3)
    with pytest.raises(ValueError):
        spmv(A, np.ones(4))


def test_spmv_linearity(rng):
    dense = rng.standard_normal((12, 12))
    A = csr_from_dense(dense)
    x = rng.standard_normal(12)
    y = rng.standard_normal(12)
    a, b = 2.3, -0.7
    lhs = spmv(A, a * x + b * y)
    rhs = a * spmv(A, x) + b * spmv(A, y)
    assert np.allclose(lhs, rhs, rtol=1e-12)


def test_residual_exact_solution(rng):
    dense = random_spd_dense(rng, 8)
    A = csr_from_dense(dense)
    x = rng.standard_normal(8)
    b = dense @ x
    r = residual(A, x, b)
    assert np.abs(r).max() < 1e-10 * np.abs(b).max()


def test_residual_zero_guess():
    A = path_matrix(4)
    b = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(residual(A, np.zeros(4), b), b)


def test_residual_random_vs_dense(rng):
    dense = rng.standard_normal((7, 7))
    A = csr_from_dense(dense)
    x = rng.standard_normal(7)
    b = rng.standard_normal(7)
    assert np.allclose(residual(A, x, b), b - dense @ x, rtol=1e-14, atol=1e-14)


def test_csr_invariants_reject_bad_input():
    with pytest.raises(ValueError):
        CsrMatrix(2, np.array([0, 1, 3]), np.array([0, 1, 1]), np.array([1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(2, np.array([0, 2, 2]), np.array([1, 0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(2, np.array([0, 1, 2]), np.array([0, 5]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(1, np.array([0, 1]), np.array([0]), np.array([np.nan]))


def test_from_coo_merges_duplicates():
    A = csr_from_coo(2, [0, 0, 1], [1, 1, 0], [2.0, 3.0, 1.0])
    assert A.nnz == 2
    assert A.entry(0, 1) == 5.0
    assert A.entry(1, 0) == 1.0


def test_entries_are_immutable():
    A = path_matrix(3)
    with pytest.raises(ValueError):
        A.values[0] = 99.0


def test_lu_identity(rng):
    lu = dense_lu_factor(np.eye(5))
    b = rng.standard_normal(5)
    assert np.allclose(dense_lu_solve(lu, b), b, rtol=1e-14)


def test_lu_2x2_hand_solve():
    lu = dense_lu_factor(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    x = dense_lu_solve(lu, np.array([1.0, 1.0]))
    assert np.allclose(x, [1.0, 1.0], rtol=1e-14)


def test_lu_vs_iterative_refinement_oracle(rng):
    A = random_spd_dense(rng, 10)
    b = rng.standard_normal(10)
    # oracle: numpy solve plus two refinement steps
    x_ref = np.linalg.solve(A, b)
    for _ in range(2):
        x_ref += np.linalg.solve(A, b - A @ x_ref)
    x = dense_lu_solve(dense_lu_factor(A), b)
    assert np.linalg.norm(x - x_ref) <= 1e-10 * np.linalg.norm(x_ref)


def test_lu_round_trip_large(rng):
    A = random_spd_dense(rng, 200)
    x = rng.standard_normal(200)
    lu = dense_lu_factor(A)
    got = dense_lu_solve(lu, A @ x)
    assert np.linalg.norm(got - x) <= 1e-9 * np.linalg.norm(x)


def test_lu_singular_matrix_error():
    with pytest.raises(SingularMatrixError):
        dense_lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_lu_residual_bound(rng):
    A = random_spd_dense(rng, 30)
    b = rng.standard_normal(30)
    x = dense_lu_solve(dense_lu_factor(A), b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_matrix_market_round_trip(tmp_path, rng):
    dense = rng.standard_normal((6, 6))
    dense[np.abs(dense) < 0.7] = 0.0
    np.fill_diagonal(dense, 1.0)
    A = csr_from_dense(dense)
    path = tmp_path / "m.mtx"
    write_matrix_market(path, A)
    B = read_matrix_market(path)
    assert B.n == A.n
    assert np.array_equal(B.col_indices, A.col_indices)
    assert np.allclose(B.values, A.values, rtol=1e-14)
