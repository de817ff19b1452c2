"""CSR storage and Jacobi-preconditioned Krylov solvers.

All kernels run over contiguous row blocks on the numba thread pool. Dot
products sum fixed-length blocks and then add the block sums in order, so
every iterate is bitwise identical for any worker count.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp
from numba import njit, prange

from .errors import ConfigurationError
from .parallel import BLOCK

# times the true residual may replace a drifted recursive one before giving up
MAX_REPLACEMENTS = 5


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    residual: float
    converged: bool
    wall_time: float
    history: tuple = ()

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "wall_time": self.wall_time,
        }


class SparseMatrix:
    """Compressed sparse row matrix with sorted, unique column indices per row."""

    def __init__(self, indptr, indices, data, shape, symmetric=False):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.shape = tuple(int(s) for s in shape)
        self.symmetric = symmetric
        if (
            len(self.indptr) != self.shape[0] + 1
            or self.indptr[-1] != len(self.indices)
            or len(self.indices) != len(self.data)
        ):
            raise ConfigurationError("inconsistent CSR arrays")

    @classmethod
    def from_scipy(cls, A, symmetric=False):
        A = sp.csr_matrix(A)
        A.sum_duplicates()
        A.sort_indices()
        return cls(A.indptr, A.indices, A.data, A.shape, symmetric)

    @classmethod
    def from_dense(cls, A, symmetric=False):
        return cls.from_scipy(sp.csr_matrix(np.asarray(A, dtype=float)), symmetric)

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def toarray(self):
        return self.to_scipy().toarray()

    def with_data(self, data, symmetric=None):
        return SparseMatrix(self.indptr, self.indices, data, self.shape,
                            self.symmetric if symmetric is None else symmetric)

    def copy(self):
        return self.with_data(self.data.copy())

    @property
    def nnz(self):
        return len(self.data)

    def diagonal(self):
        return _diagonal(self.indptr, self.indices, self.data, min(self.shape))

    def __matmul__(self, x):
        return spmv(self, x)

    def write_matrix_market(self, path):
        scipy.io.mmwrite(str(path), self.to_scipy())


# --------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _diagonal(indptr, indices, data, n):
    d = np.zeros(n)
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            if indices[k] == i:
                d[i] = data[k]
    return d


@njit(parallel=True, cache=True)
def _spmv(indptr, indices, data, x, y):
    n = indptr.shape[0] - 1
    nb = (n + BLOCK - 1) // BLOCK
    for b in prange(nb):
        for i in range(b * BLOCK, min(n, (b + 1) * BLOCK)):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += data[k] * x[indices[k]]
            y[i] = s


@njit(parallel=True, cache=True)
def _dot(x, y):
    n = x.shape[0]
    nb = (n + BLOCK - 1) // BLOCK
    partial = np.zeros(nb)
    for b in prange(nb):
        s = 0.0
        for i in range(b * BLOCK, min(n, (b + 1) * BLOCK)):
            s += x[i] * y[i]
        partial[b] = s
    total = 0.0
    for b in range(nb):
        total += partial[b]
    return total


@njit(parallel=True, cache=True)
def _axpby(a, x, b, y, out):
    """out = a*x + b*y"""
    n = x.shape[0]
    nb = (n + BLOCK - 1) // BLOCK
    for blk in prange(nb):
        for i in range(blk * BLOCK, min(n, (blk + 1) * BLOCK)):
            out[i] = a * x[i] + b * y[i]


@njit(parallel=True, cache=True)
def _cg_update(x, r, p, Ap, alpha, minv, z):
    """x += alpha p; r -= alpha Ap; z = minv r. Returns (r.r, r.z)."""
    n = x.shape[0]
    nb = (n + BLOCK - 1) // BLOCK
    rr = np.zeros(nb)
    rz = np.zeros(nb)
    for b in prange(nb):
        s1 = 0.0
        s2 = 0.0
        for i in range(b * BLOCK, min(n, (b + 1) * BLOCK)):
            x[i] += alpha * p[i]
            r[i] -= alpha * Ap[i]
            z[i] = minv[i] * r[i]
            s1 += r[i] * r[i]
            s2 += r[i] * z[i]
        rr[b] = s1
        rz[b] = s2
    t1 = 0.0
    t2 = 0.0
    for b in range(nb):
        t1 += rr[b]
        t2 += rz[b]
    return t1, t2


@njit(parallel=True, cache=True)
def _scale(d, x, out):
    n = x.shape[0]
    nb = (n + BLOCK - 1) // BLOCK
    for b in prange(nb):
        for i in range(b * BLOCK, min(n, (b + 1) * BLOCK)):
            out[i] = d[i] * x[i]


def spmv(A, x, out=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] != A.shape[1]:
        raise ConfigurationError(f"dimension mismatch: matrix {A.shape} times vector of length {x.shape[0]}")
    y = np.empty(A.shape[0]) if out is None else out
    _spmv(A.indptr, A.indices, A.data, x, y)
    return y


def dot(x, y):
    return _dot(np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64))


def jacobi_preconditioner(A):
    """Inverse diagonal of ``A``."""
    d = A.diagonal()
    zero = np.flatnonzero(d == 0.0)
    if len(zero):
        raise ConfigurationError(f"zero diagonal entry at dof {zero[0]}; Jacobi preconditioner undefined")
    return 1.0 / d


def _setup(A, b, x0, maxit):
    n = A.shape[0]
    if A.shape[0] != A.shape[1] or len(b) != n:
        raise ConfigurationError(f"dimension mismatch: matrix {A.shape}, rhs {len(b)}")
    b = np.ascontiguousarray(b, dtype=np.float64)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    return n, b, x, (10 * n if maxit is None else int(maxit))


def cg(A, b, tol=1e-8, maxit=None, x0=None, precondition=True):
    """Preconditioned conjugate gradients for a symmetric positive definite ``A``.

    Convergence is declared when ``||b - A x|| <= tol * ||b||``; the returned
    report carries the residual history.
    """
    t0 = time.perf_counter()
    n, b, x, maxit = _setup(A, b, x0, maxit)
    bnorm = np.sqrt(dot(b, b))
    if bnorm == 0.0:
        return np.zeros(n), SolverReport(0, 0.0, True, time.perf_counter() - t0, (0.0,))
    minv = jacobi_preconditioner(A) if precondition else np.ones(n)
    r = b - spmv(A, x)
    z = np.empty(n)
    res = np.sqrt(dot(r, r)) / bnorm
    history = [res]
    Ap = np.empty(n)
    it = 0
    for _ in range(MAX_REPLACEMENTS):
        _scale(minv, r, z)
        rz = dot(r, z)
        p = z.copy()
        while res > tol and it < maxit:
            spmv(A, p, Ap)
            pAp = dot(p, Ap)
            if pAp <= 0.0:
                break  # not positive definite along p
            alpha = rz / pAp
            rr, rz_new = _cg_update(x, r, p, Ap, alpha, minv, z)
            it += 1
            res = np.sqrt(rr) / bnorm
            if res > 10.0 * history[-1]:
                history.append(res)
                break  # divergence guard
            history.append(res)
            _axpby(1.0, z, rz_new / rz, p, p)
            rz = rz_new
        # the recursive residual can drift; only the true residual decides
        r = b - spmv(A, x)
        res = np.sqrt(dot(r, r)) / bnorm
        if res <= tol or it >= maxit or len(history) < 2 or history[-1] > 10.0 * history[-2]:
            break
    report = SolverReport(it, float(res), bool(res <= tol), time.perf_counter() - t0, tuple(history))
    return x, report


def bicgstab(A, b, tol=1e-8, maxit=None, x0=None, precondition=True):
    """Right-preconditioned BiCGSTAB for a general nonsingular ``A``."""
    t0 = time.perf_counter()
    n, b, x, maxit = _setup(A, b, x0, maxit)
    bnorm = np.sqrt(dot(b, b))
    if bnorm == 0.0:
        return np.zeros(n), SolverReport(0, 0.0, True, time.perf_counter() - t0, (0.0,))
    minv = jacobi_preconditioner(A) if precondition else np.ones(n)
    r = b - spmv(A, x)
    res = np.sqrt(dot(r, r)) / bnorm
    history = [res]
    v = np.zeros(n)
    p = np.zeros(n)
    phat = np.empty(n)
    shat = np.empty(n)
    s = np.empty(n)
    t = np.empty(n)
    it = 0
    restarts, max_restarts = 0, 50
    for _ in range(MAX_REPLACEMENTS):
        r_hat = r.copy()
        rho = alpha = omega = 1.0
        v[:] = 0.0
        p[:] = 0.0
        while res > tol and it < maxit:
            rho_new = dot(r_hat, r)
            if abs(rho_new) <= 1e-30 * bnorm * bnorm:
                # shadow residual orthogonal to r: restart from the current residual
                if restarts >= max_restarts:
                    break
                restarts += 1
                r_hat = r.copy()
                rho = alpha = omega = 1.0
                v[:] = 0.0
                p[:] = 0.0
                rho_new = dot(r_hat, r)
            beta = (rho_new / rho) * (alpha / omega)
            rho = rho_new
            # p = r + beta (p - omega v)
            _axpby(1.0, p, -omega, v, p)
            _axpby(1.0, r, beta, p, p)
            _scale(minv, p, phat)
            spmv(A, phat, v)
            denom = dot(r_hat, v)
            if denom == 0.0:
                break
            alpha = rho / denom
            _axpby(1.0, r, -alpha, v, s)
            it += 1
            snorm = np.sqrt(dot(s, s)) / bnorm
            if snorm <= tol:
                _axpby(1.0, x, alpha, phat, x)
                r = s.copy()
                res = snorm
                history.append(res)
                break
            _scale(minv, s, shat)
            spmv(A, shat, t)
            tt = dot(t, t)
            omega = dot(t, s) / tt if tt > 0.0 else 0.0
            _axpby(1.0, x, alpha, phat, x)
            _axpby(1.0, x, omega, shat, x)
            _axpby(1.0, s, -omega, t, r)
            res = np.sqrt(dot(r, r)) / bnorm
            history.append(res)
            if omega == 0.0:
                break
        r = b - spmv(A, x)
        res = np.sqrt(dot(r, r)) / bnorm
        if res <= tol or it >= maxit or restarts >= max_restarts:
            break
    report = SolverReport(it, float(res), bool(res <= tol), time.perf_counter() - t0, tuple(history))
    return x, report


def read_matrix_market(path):
    return SparseMatrix.from_scipy(scipy.io.mmread(str(path)))
