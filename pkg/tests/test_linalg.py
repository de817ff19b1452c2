import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from hydrotherm.errors import ConfigurationError
from hydrotherm.linalg import (
    SparseMatrix,
    bicgstab,
    cg,
    jacobi_preconditioner,
    read_matrix_market,
    spmv,
)
from hydrotherm.parallel import workers


def laplacian(n):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def test_spmv_examples():
    x = np.arange(5.0)
    assert np.array_equal(spmv(SparseMatrix.from_scipy(sp.eye(5)), x), x)
    assert np.array_equal(spmv(SparseMatrix.from_scipy(2 * sp.eye(4)), np.ones(4)), 2 * np.ones(4))
    assert spmv(SparseMatrix.from_dense([[4, 1], [1, 3]]), np.array([1.0, 2.0])).tolist() == [6.0, 7.0]


def test_spmv_dimension_mismatch():
    with pytest.raises(ConfigurationError, match="dimension"):
        spmv(SparseMatrix.from_scipy(sp.eye(3)), np.ones(4))


@given(st.integers(1, 40), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_spmv_linear(n, a, b, seed):
    rng = np.random.default_rng(seed)
    A = SparseMatrix.from_scipy(sp.random(n, n, density=0.3, random_state=rng) + sp.eye(n))
    x, y = rng.normal(size=n), rng.normal(size=n)
    assert np.allclose(spmv(A, a * x + b * y), a * spmv(A, x) + b * spmv(A, y), atol=1e-10)


def test_cg_identity_and_2x2():
    b = np.array([3.0, -1.0, 2.0])
    x, rep = cg(SparseMatrix.from_scipy(sp.eye(3)), b)
    assert rep.converged and rep.iterations == 1 and np.allclose(x, b)
    x, rep = cg(SparseMatrix.from_dense([[4, 1], [1, 3]]), np.array([1.0, 2.0]))
    assert np.allclose(x, [1 / 11, 7 / 11], atol=1e-12)


def test_cg_laplacian_vs_tridiagonal_solve():
    n = 50
    b = np.zeros(n)
    b[0] = 1.0
    x, rep = cg(SparseMatrix.from_scipy(laplacian(n)), b, tol=1e-12)
    ab = np.vstack([np.r_[0, -np.ones(n - 1)], 2 * np.ones(n), np.r_[-np.ones(n - 1), 0]])
    assert rep.converged
    assert np.allclose(x, scipy.linalg.solve_banded((1, 1), ab, b), rtol=1e-8, atol=1e-10)
    assert rep.residual <= 1e-12


def test_cg_maxit_gives_unconverged_report():
    x, rep = cg(SparseMatrix.from_scipy(laplacian(100)), np.ones(100), tol=1e-14, maxit=3)
    assert not rep.converged and rep.iterations == 3


def test_bicgstab_examples():
    b = np.array([1.0, 2.0])
    x, rep = bicgstab(SparseMatrix.from_scipy(sp.eye(2)), b)
    assert rep.iterations == 1 and np.allclose(x, b)
    x, rep = bicgstab(SparseMatrix.from_dense([[2, 1], [0, 2]]), np.array([3.0, 2.0]))
    assert rep.converged and np.allclose(x, [1.0, 1.0], atol=1e-10)


def advection_diffusion(n, pe):
    # central differences, cell Peclet pe = v dx / (2 D)
    return sp.diags([-(1 + pe) * np.ones(n - 1), 2 * np.ones(n), -(1 - pe) * np.ones(n - 1)], [-1, 0, 1],
                    format="csr")


def test_bicgstab_advection_diffusion_vs_dense_lu():
    A = advection_diffusion(20, 0.5)
    b = np.random.default_rng(0).normal(size=20)
    x, rep = bicgstab(SparseMatrix.from_scipy(A), b, tol=1e-12)
    exact = scipy.linalg.lu_solve(scipy.linalg.lu_factor(A.toarray()), b)
    assert rep.converged
    assert np.allclose(x, exact, rtol=1e-8, atol=1e-10)


def test_bicgstab_recovers_from_dirichlet_breakdown():
    # identity rows carrying the whole initial residual used to zero the shadow product
    A = advection_diffusion(30, 0.2).tolil()
    for i in (0, 29):
        A.rows[i], A.data[i] = [i], [1.0]
    b = np.zeros(30)
    b[0] = 1.0
    x, rep = bicgstab(SparseMatrix.from_scipy(A.tocsr()), b, tol=1e-12)
    assert rep.converged
    assert np.allclose(A.tocsr() @ x, b, atol=1e-10)


def test_jacobi():
    assert np.array_equal(jacobi_preconditioner(SparseMatrix.from_scipy(4 * sp.eye(3))), np.full(3, 0.25))
    assert np.array_equal(jacobi_preconditioner(SparseMatrix.from_scipy(sp.eye(3))), np.ones(3))
    with pytest.raises(ConfigurationError, match="dof 1"):
        jacobi_preconditioner(SparseMatrix.from_dense([[1, 0], [0, 0]]))


def test_jacobi_reduces_cg_iterations_on_graded_pressure_system():
    from hydrotherm.fem import apply_dirichlet, assemble_pressure
    from hydrotherm.scenarios import DAY, build_ates_benchmark
    from hydrotherm.sim import Model, initialize

    model = Model(build_ates_benchmark("coarse"))
    s = initialize(model)
    sys_ = apply_dirichlet(assemble_pressure(model.mesh, model.materials, model.fluid, s.P, DAY,
                                             fluxes=model.fluxes("pressure", DAY),
                                             dirichlet=model.dirichlet("pressure", DAY)), symmetrize=True)
    _, with_pc = cg(sys_.matrix, sys_.rhs, x0=s.P, maxit=20000)
    _, without = cg(sys_.matrix, sys_.rhs, x0=s.P, maxit=20000, precondition=False)
    assert with_pc.converged
    assert with_pc.iterations < without.iterations


@given(st.integers(2, 60), st.integers(0, 2**31))
def test_converged_implies_residual_within_tolerance(n, seed):
    rng = np.random.default_rng(seed)
    R = sp.random(n, n, density=0.2, random_state=rng)
    A = SparseMatrix.from_scipy(R @ R.T + n * sp.eye(n))
    b = rng.normal(size=n)
    for solver in (cg, bicgstab):
        x, rep = solver(A, b, tol=1e-8)
        true_res = np.linalg.norm(b - A.to_scipy() @ x) / np.linalg.norm(b)
        assert rep.converged and rep.residual <= 1e-8
        assert true_res <= 1e-7


def test_cg_residual_history_respects_divergence_guard():
    A = SparseMatrix.from_scipy(laplacian(200) + 0.01 * sp.eye(200))
    _, rep = cg(A, np.ones(200), tol=1e-10)
    h = np.asarray(rep.history)
    assert rep.converged
    assert np.all(h[1:] <= 10 * h[:-1])


@pytest.mark.parametrize("solver", [cg, bicgstab])
def test_solvers_deterministic_across_workers(solver):
    n = 20000  # several reduction blocks
    A = SparseMatrix.from_scipy(laplacian(n) + 0.001 * sp.eye(n) + (sp.diags([0.2 * np.ones(n - 1)], [1])
                                                                     if solver is bicgstab else 0))
    b = np.sin(np.arange(n))
    out = []
    for w in (1, 2, 4):
        with workers(w):
            out.append(solver(A, b, tol=1e-8, maxit=400)[0])
    assert np.array_equal(out[0], out[1]) and np.array_equal(out[0], out[2])


def test_matrix_market_round_trip(tmp_path):
    A = SparseMatrix.from_dense([[4, 1], [1, 3]])
    A.write_matrix_market(tmp_path / "a.mtx")
    assert np.array_equal(read_matrix_market(tmp_path / "a.mtx").toarray(), A.toarray())
