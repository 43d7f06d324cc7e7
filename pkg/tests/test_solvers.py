import numpy as np
import pytest

from amgkit import (
    SmootherSpec,
    bicgstab,
    build_hierarchy,
    csr_from_dense,
    dense_lu_factor,
    dense_lu_solve,
    gauss_seidel_step,
    smooth,
    spmv,
    vcycle,
    vcycle_preconditioner,
)

from conftest import path_matrix, random_spd_dense, random_sym_m_matrix


def test_gs_diagonal_matrix_exact_in_one_sweep(rng):
    A = csr_from_dense(np.diag([2.0, 4.0, 8.0]))
    b = rng.standard_normal(3)
    x = gauss_seidel_step(A, np.zeros(3), b)
    assert np.allclose(x, b / np.array([2.0, 4.0, 8.0]), rtol=1e-15)


def test_gs_forward_hand_sweep():
    A = path_matrix(3)
    x = gauss_seidel_step(A, np.zeros(3), np.ones(3), direction="forward")
    assert np.allclose(x, [0.5, 0.75, 0.875], rtol=1e-15)


def test_gs_rejects_zero_diagonal():
    A = csr_from_dense(np.array([[0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        gauss_seidel_step(A, np.zeros(2), np.ones(2))


def test_gs_energy_norm_monotone(rng):
    for _ in range(5):
        n = 15
        dense = random_spd_dense(rng, n)
        A = csr_from_dense(dense)
        x_star = rng.standard_normal(n)
        b = dense @ x_star
        x = np.zeros(n)
        prev = None
        for _ in range(8):
            gauss_seidel_step(A, x, b)
            err = x - x_star
            energy = float(err @ dense @ err)
            if prev is not None:
                assert energy <= prev * (1 + 1e-12)
            prev = energy


def test_smooth_backward_and_steps(rng):
    A = path_matrix(5)
    b = rng.standard_normal(5)
    x1 = smooth(A, np.zeros(5), b, SmootherSpec("gs-backward", steps=2))
    x2 = np.zeros(5)
    gauss_seidel_step(A, x2, b, direction="backward")
    gauss_seidel_step(A, x2, b, direction="backward")
    assert np.array_equal(x1, x2)


def test_jacobi_smoother_matches_formula(rng):
    dense = random_sym_m_matrix(rng, 8).to_dense()
    A = csr_from_dense(dense)
    b = rng.standard_normal(8)
    x0 = rng.standard_normal(8)
    got = smooth(A, x0.copy(), b, SmootherSpec("jacobi"))
    D = np.diag(dense)
    expected = (b - (dense - np.diag(D)) @ x0) / D
    assert np.allclose(got, expected, rtol=1e-14)


@pytest.fixture
def small_hierarchy(rng):
    from conftest import stencil3d_matrix

    A = stencil3d_matrix(6)
    return A, build_hierarchy(A, coarse_target=30)


def test_vcycle_single_level_is_direct_solve(rng):
    A = random_sym_m_matrix(rng, 12)
    h = build_hierarchy(A, coarse_target=100)
    b = rng.standard_normal(12)
    z = vcycle(h, b)
    lu = dense_lu_factor(A.to_dense())
    assert np.array_equal(z, dense_lu_solve(lu, b))


def test_vcycle_zero_rhs(small_hierarchy):
    A, h = small_hierarchy
    assert np.array_equal(vcycle(h, np.zeros(A.n)), np.zeros(A.n))


def test_vcycle_linearity(small_hierarchy, rng):
    A, h = small_hierarchy
    b1 = rng.standard_normal(A.n)
    b2 = rng.standard_normal(A.n)
    a, c = 1.7, -2.3
    lhs = vcycle(h, a * b1 + c * b2)
    rhs = a * vcycle(h, b1) + c * vcycle(h, b2)
    scale = np.abs(rhs).max()
    assert np.abs(lhs - rhs).max() <= 1e-11 * scale


def test_vcycle_deterministic(small_hierarchy, rng):
    A, h = small_hierarchy
    b = rng.standard_normal(A.n)
    assert np.array_equal(vcycle(h, b), vcycle(h, b))


def test_bicgstab_identity_converges_in_one_iteration(rng):
    A = csr_from_dense(np.eye(6))
    b = rng.standard_normal(6)
    x, rep = bicgstab(lambda v: spmv(A, v), b)
    assert rep.converged and rep.iterations == 1
    assert np.allclose(x, b, rtol=1e-14)


def test_bicgstab_spd_with_jacobi_preconditioner(rng):
    dense = random_spd_dense(rng, 20)
    A = csr_from_dense(dense)
    b = rng.standard_normal(20)
    d = np.diag(dense)
    x, rep = bicgstab(lambda v: spmv(A, v), b, precond=lambda r: r / d, tol=1e-10)
    assert rep.converged
    x_ref = np.linalg.solve(dense, b)
    assert np.linalg.norm(dense @ x - b) <= 10 * 1e-10 * np.linalg.norm(b)
    assert np.allclose(x, x_ref, rtol=1e-6)


def test_bicgstab_exact_inverse_preconditioner_one_iteration(rng):
    dense = random_spd_dense(rng, 10)
    A = csr_from_dense(dense)
    b = rng.standard_normal(10)
    inv = np.linalg.inv(dense)
    x, rep = bicgstab(lambda v: spmv(A, v), b, precond=lambda r: inv @ r, tol=1e-12)
    assert rep.converged and rep.iterations == 1


def test_bicgstab_reports_nonconvergence(rng):
    dense = random_spd_dense(rng, 30)
    A = csr_from_dense(dense)
    b = rng.standard_normal(30)
    x, rep = bicgstab(lambda v: spmv(A, v), b, tol=1e-14, max_iter=2)
    assert not rep.converged
    assert rep.iterations == 2


def test_bicgstab_report_invariants(small_hierarchy, rng):
    A, h = small_hierarchy
    b = rng.standard_normal(A.n)
    precond = vcycle_preconditioner(h)
    x, rep = bicgstab(lambda v: spmv(A, v), b, precond=precond, tol=1e-9)
    assert rep.converged
    assert len(rep.residual_history) == rep.iterations + 1
    assert rep.reduction == rep.residual_history[-1] / rep.residual_history[0]
    # reported reduction tracks the true residual within a factor of 10
    true_red = np.linalg.norm(b - spmv(A, x)) / np.linalg.norm(b)
    assert true_red <= 10 * max(rep.reduction, 1e-9)


def test_bicgstab_zero_rhs():
    A = path_matrix(4)
    x, rep = bicgstab(lambda v: spmv(A, v), np.zeros(4))
    assert rep.converged and rep.iterations == 0
    assert np.array_equal(x, np.zeros(4))


def test_bicgstab_breakdown_reported_not_hidden():
    # rotation operator: r0 . A r0 = 0 on the first step
    A = csr_from_dense(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    x, rep = bicgstab(lambda v: spmv(A, v), np.array([1.0, 0.0]), max_iter=10)
    assert rep.breakdown
    assert not rep.converged


def test_bicgstab_nan_raises_with_iteration_index():
    with pytest.raises(FloatingPointError, match="iteration 1"):
        bicgstab(lambda v: v * np.nan, np.ones(3))


def test_bicgstab_rejects_bad_tol():
    A = path_matrix(3)
    with pytest.raises(ValueError):
        bicgstab(lambda v: spmv(A, v), np.ones(3), tol=0.0)


def test_vcycle_dimension_mismatch(small_hierarchy):
    A, h = small_hierarchy
    with pytest.raises(ValueError):
        vcycle(h, np.zeros(A.n + 1))


def test_vcycle_preconditioned_solve_on_stencil(small_hierarchy, rng):
    A, h = small_hierarchy
    x_star = rng.standard_normal(A.n)
    b = spmv(A, x_star)
    x, rep = bicgstab(lambda v: spmv(A, v), b, precond=vcycle_preconditioner(h))
    assert rep.converged
    assert np.linalg.norm(x - x_star) <= 1e-5 * np.linalg.norm(x_star)


def test_history_csv_format(small_hierarchy, rng):
    A, h = small_hierarchy
    b = rng.standard_normal(A.n)
    _, rep = bicgstab(lambda v: spmv(A, v), b, precond=vcycle_preconditioner(h))
    lines = rep.history_csv().strip().splitlines()
    assert lines[0] == "iteration,residual_norm"
    assert len(lines) == len(rep.residual_history) + 1
