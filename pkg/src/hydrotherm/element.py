"""Reference 8-node trilinear hexahedron and per-cell quadrature kernels.

Local node order follows the VTK hexahedron convention: nodes 0-3 form the
bottom face (zeta = -1) counter-clockwise seen from above, nodes 4-7 the top.
"""

import numpy as np
from numba import njit

REF_NODES = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)

# Local faces, node order counter-clockwise seen from outside.
FACE_NODES = np.array(
    [
        [0, 3, 2, 1],  # zeta = -1
        [4, 5, 6, 7],  # zeta = +1
        [0, 1, 5, 4],  # eta = -1
        [1, 2, 6, 5],  # xi = +1
        [2, 3, 7, 6],  # eta = +1
        [3, 0, 4, 7],  # xi = -1
    ],
    dtype=np.int64,
)


def gauss_points(order=2):
    """Tensor Gauss-Legendre rule on [-1, 1]^3 with ``order`` points per direction."""
    if order not in (2, 3):
        raise ValueError(f"quadrature order must be 2 or 3, got {order}")
    x, w = np.polynomial.legendre.leggauss(order)
    pts = np.array([[a, b, c] for c in x for b in x for a in x])
    wts = np.array([wa * wb * wc for wc in w for wb in w for wa in w])
    return pts, wts


def shape_functions(points):
    """Values ``(nq, 8)`` and reference gradients ``(nq, 8, 3)`` at ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    s = REF_NODES[None, :, :] * pts[:, None, :]  # (nq, 8, 3)
    f = 1.0 + s
    N = 0.125 * f[..., 0] * f[..., 1] * f[..., 2]
    dN = np.empty(pts.shape[:1] + (8, 3))
    dN[..., 0] = 0.125 * REF_NODES[:, 0] * f[..., 1] * f[..., 2]
    dN[..., 1] = 0.125 * REF_NODES[:, 1] * f[..., 0] * f[..., 2]
    dN[..., 2] = 0.125 * REF_NODES[:, 2] * f[..., 0] * f[..., 1]
    return N, dN


class ReferenceElement:
    """Quadrature data for one rule, in the contiguous layout the kernels expect."""

    def __init__(self, order=2):
        self.order = order
        self.points, self.weights = gauss_points(order)
        self.N, self.dN = shape_functions(self.points)
        self.N = np.ascontiguousarray(self.N)
        self.dN = np.ascontiguousarray(self.dN)


_REFERENCE = {}


def reference(order=2):
    if order not in _REFERENCE:
        _REFERENCE[order] = ReferenceElement(order)
    return _REFERENCE[order]


@njit(cache=True)
def cell_geometry(xe, dN_ref, grads, detj):
    """Fill physical gradients and Jacobian determinants at every quadrature point.

    Returns the smallest determinant encountered.
    """
    nq = dN_ref.shape[0]
    dmin = np.inf
    J = np.empty((3, 3))
    Jinv = np.empty((3, 3))
    for q in range(nq):
        for i in range(3):
            for j in range(3):
                s = 0.0
                for a in range(8):
                    s += xe[a, i] * dN_ref[q, a, j]
                J[i, j] = s
        det = (
            J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
            - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
            + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
        )
        detj[q] = det
        if det < dmin:
            dmin = det
        if det == 0.0:
            continue
        inv = 1.0 / det
        Jinv[0, 0] = (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]) * inv
        Jinv[0, 1] = (J[0, 2] * J[2, 1] - J[0, 1] * J[2, 2]) * inv
        Jinv[0, 2] = (J[0, 1] * J[1, 2] - J[0, 2] * J[1, 1]) * inv
        Jinv[1, 0] = (J[1, 2] * J[2, 0] - J[1, 0] * J[2, 2]) * inv
        Jinv[1, 1] = (J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]) * inv
        Jinv[1, 2] = (J[0, 2] * J[1, 0] - J[0, 0] * J[1, 2]) * inv
        Jinv[2, 0] = (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]) * inv
        Jinv[2, 1] = (J[0, 1] * J[2, 0] - J[0, 0] * J[2, 1]) * inv
        Jinv[2, 2] = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]) * inv
        # grad N = J^{-T} grad_ref N
        for a in range(8):
            for i in range(3):
                s = 0.0
                for j in range(3):
                    s += dN_ref[q, a, j] * Jinv[j, i]
                grads[q, a, i] = s
    return dmin


@njit(cache=True)
def integrate_cell(N, w, vel, grads, detj, M, A, C, with_advection):
    """Mass, stiffness and (optionally) advection matrices from cell geometry."""
    M[:, :] = 0.0
    A[:, :] = 0.0
    C[:, :] = 0.0
    nq = N.shape[0]
    for q in range(nq):
        wq = w[q] * detj[q]
        for b in range(8):
            vb = 0.0
            if with_advection:
                vb = vel[q, 0] * grads[q, b, 0] + vel[q, 1] * grads[q, b, 1] + vel[q, 2] * grads[q, b, 2]
            for a in range(8):
                M[a, b] += wq * N[q, a] * N[q, b]
                A[a, b] += wq * (
                    grads[q, a, 0] * grads[q, b, 0] + grads[q, a, 1] * grads[q, b, 1] + grads[q, a, 2] * grads[q, b, 2]
                )
                if with_advection:
                    C[a, b] += wq * N[q, a] * vb


@njit(cache=True)
def cell_matrices(xe, N, dN_ref, w, vel, M, A, C, grads, detj):
    """Unit-coefficient mass, stiffness and advection matrices of one cell.

    ``vel`` holds the advecting velocity at each quadrature point.
    Returns the smallest Jacobian determinant.
    """
    dmin = cell_geometry(xe, dN_ref, grads, detj)
    integrate_cell(N, w, vel, grads, detj, M, A, C, True)
    return dmin


@njit(cache=True)
def cell_volumes_and_min_det(nodes, cells, dN_ref, w):
    """Per-cell volume and smallest Jacobian determinant."""
    m = cells.shape[0]
    nq = w.shape[0]
    vol = np.empty(m)
    dmin = np.empty(m)
    xe = np.empty((8, 3))
    grads = np.empty((nq, 8, 3))
    detj = np.empty(nq)
    for c in range(m):
        for a in range(8):
            for i in range(3):
                xe[a, i] = nodes[cells[c, a], i]
        dmin[c] = cell_geometry(xe, dN_ref, grads, detj)
        s = 0.0
        for q in range(nq):
            s += w[q] * detj[q]
        vol[c] = s
    return vol, dmin
