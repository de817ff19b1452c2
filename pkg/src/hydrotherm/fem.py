"""Q1 finite-element assembly of the pressure and temperature systems.

Both systems come from backward Euler in time:

pressure::

    (M + h k B A) P1 = M P0 + h B (N, q_in)_boundary - h k B rho_w g (dN/dz, 1)

temperature::

    (M + h lambda/c_T A + h c_w/c_T C(q)) T1 = M T0 + h/c_T (N, q_T,in)_boundary

with cellwise constant coefficients. ``q_in`` is the inward normal Darcy
flux and ``q_T,in`` the inward conductive heat flux.

Element work is split over the owned cells of each mesh partition. Global
entries are then gathered from the element arrays in ascending cell order,
so the assembled matrix does not depend on the partition or worker count.
"""

import weakref
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .element import FACE_NODES, cell_geometry, cell_matrices, integrate_cell, reference
from .errors import ConfigurationError, MeshError
from .linalg import SparseMatrix
from .parallel import BLOCK
from .physics import effective_heat_capacity, effective_lambda, mobility


@dataclass(frozen=True)
class ElementMatrices:
    mass: np.ndarray
    stiffness: np.ndarray
    advection: np.ndarray
    load: np.ndarray


@dataclass(frozen=True)
class AssembledSystem:
    """Global system plus the Dirichlet data still to be imposed."""

    matrix: SparseMatrix
    rhs: np.ndarray
    dirichlet_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    dirichlet_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    constrained: bool = False

    @property
    def dof_map(self):
        # one dof per mesh node, numbered like the nodes
        return np.arange(self.matrix.shape[0])

    @property
    def dirichlet(self):
        return dict(zip(self.dirichlet_dofs.tolist(), self.dirichlet_values.tolist()))


# --------------------------------------------------------------------------
# element level


def element_matrices(coords, mass_coef=1.0, stiffness_coef=1.0, advection_coef=1.0, velocity=None,
                     load_direction=None, order=2, cell_id=0):
    """Mass, stiffness, advection matrices and body-load vector of one hexahedron.

    ``velocity`` is a 3-vector or one 3-vector per quadrature point. The load
    vector is ``(grad N, load_direction)`` integrated over the cell.
    """
    ref = reference(order)
    nq = len(ref.weights)
    xe = np.ascontiguousarray(coords, dtype=float)
    vel = np.zeros((nq, 3)) if velocity is None else np.broadcast_to(np.asarray(velocity, float), (nq, 3)).copy()
    M, A, C = np.empty((8, 8)), np.empty((8, 8)), np.empty((8, 8))
    grads, detj = np.empty((nq, 8, 3)), np.empty(nq)
    dmin = cell_matrices(xe, ref.N, ref.dN, ref.weights, vel, M, A, C, grads, detj)
    if dmin <= 0.0:
        raise MeshError(f"cell {cell_id} has a non-positive Jacobian determinant ({dmin:.3e})")
    load = np.zeros(8)
    if load_direction is not None:
        load = np.einsum("q,qai,i->a", ref.weights * detj, grads, np.asarray(load_direction, float))
    return ElementMatrices(mass_coef * M, stiffness_coef * A, advection_coef * C, load)


# --------------------------------------------------------------------------
# sparsity pattern and ordered gather


class DofPattern:
    """CSR pattern of a mesh plus the gather maps from element arrays."""

    def __init__(self, mesh):
        cells = mesh.cells
        n = mesh.n_nodes
        rows = np.repeat(cells, 8, axis=1).ravel()
        cols = np.tile(cells, (1, 8)).ravel()
        keys = rows * n + cols
        unique, pos = np.unique(keys, return_inverse=True)
        self.indices = unique % n
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(unique // n, minlength=n))])
        # element-entry index of every contribution, grouped by global entry in cell order
        self.entry_src = np.argsort(pos, kind="stable")
        self.entry_ptr = np.concatenate([[0], np.cumsum(np.bincount(pos, minlength=len(unique)))])
        node_keys = cells.ravel()
        self.node_src = np.argsort(node_keys, kind="stable")
        self.node_ptr = np.concatenate([[0], np.cumsum(np.bincount(node_keys, minlength=n))])
        self.n = n
        if mesh.partition is None:
            self.part_cells = np.arange(mesh.n_cells)
            self.part_ptr = np.array([0, mesh.n_cells])
        else:
            self.part_cells = np.argsort(mesh.partition, kind="stable")
            counts = np.bincount(mesh.partition)
            self.part_ptr = np.concatenate([[0], np.cumsum(counts)])

    @property
    def nnz(self):
        return len(self.indices)


_PATTERNS = weakref.WeakKeyDictionary()


def dof_pattern(mesh):
    if mesh not in _PATTERNS:
        _PATTERNS[mesh] = DofPattern(mesh)
    return _PATTERNS[mesh]


@njit(parallel=True, cache=True)
def _gather(ptr, src, flat, out):
    n = out.shape[0]
    nb = (n + BLOCK - 1) // BLOCK
    for b in prange(nb):
        for e in range(b * BLOCK, min(n, (b + 1) * BLOCK)):
            s = 0.0
            for k in range(ptr[e], ptr[e + 1]):
                s += flat[src[k]]
            out[e] = s


def gather_matrix(pattern, element_values, order=None):
    """Sum element matrices ``(m, 8, 8)`` into CSR data.

    With ``order`` given, contributions are instead added cell by cell in that
    traversal order (reference path for permutation tests).
    """
    flat = np.ascontiguousarray(element_values).reshape(-1)
    data = np.empty(pattern.nnz)
    if order is None:
        _gather(pattern.entry_ptr, pattern.entry_src, flat, data)
        return data
    m = len(flat) // 64
    pos = np.empty(len(flat), dtype=np.int64)
    pos[pattern.entry_src] = np.repeat(np.arange(pattern.nnz), np.diff(pattern.entry_ptr))
    idx = (np.asarray(order)[:, None] * 64 + np.arange(64)).ravel()
    data[:] = 0.0
    np.add.at(data, pos[idx], flat[idx])
    assert m == len(order)
    return data


def gather_vector(pattern, element_vectors):
    out = np.empty(pattern.n)
    _gather(pattern.node_ptr, pattern.node_src, np.ascontiguousarray(element_vectors).reshape(-1), out)
    return out


# --------------------------------------------------------------------------
# cell kernels


@njit(parallel=True, cache=True)
def _pressure_cells(nodes, cells, part_ptr, part_cells, N, dN, w, stiff, grav, p_old, vals, rhs_el):
    nq = w.shape[0]
    nparts = part_ptr.shape[0] - 1
    bad = np.zeros(nparts, dtype=np.int64) - 1
    for part in prange(nparts):
        xe = np.empty((8, 3))
        vel = np.zeros((nq, 3))
        M = np.empty((8, 8))
        A = np.empty((8, 8))
        C = np.empty((8, 8))
        grads = np.empty((nq, 8, 3))
        detj = np.empty(nq)
        for idx in range(part_ptr[part], part_ptr[part + 1]):
            c = part_cells[idx]
            for a in range(8):
                for i in range(3):
                    xe[a, i] = nodes[cells[c, a], i]
            if cell_geometry(xe, dN, grads, detj) <= 0.0 and bad[part] < 0:
                bad[part] = c
            integrate_cell(N, w, vel, grads, detj, M, A, C, False)
            for a in range(8):
                s = 0.0
                for b in range(8):
                    vals[c, a, b] = M[a, b] + stiff[c] * A[a, b]
                    s += M[a, b] * p_old[cells[c, b]]
                g = 0.0
                for q in range(nq):
                    g += w[q] * detj[q] * grads[q, a, 2]
                rhs_el[c, a] = s - grav[c] * g
    return bad


@njit(parallel=True, cache=True)
def _temperature_cells(nodes, cells, part_ptr, part_cells, N, dN, w, k_cell, diff_h, retard, rho_g, h, p_new,
                       t_old, supg, vals, rhs_el, q_cell):
    nq = w.shape[0]
    nparts = part_ptr.shape[0] - 1
    bad = np.zeros(nparts, dtype=np.int64) - 1
    for part in prange(nparts):
        xe = np.empty((8, 3))
        vel = np.zeros((nq, 3))
        M = np.empty((8, 8))
        A = np.empty((8, 8))
        C = np.empty((8, 8))
        grads = np.empty((nq, 8, 3))
        detj = np.empty(nq)
        vgrad = np.empty(8)
        for idx in range(part_ptr[part], part_ptr[part + 1]):
            c = part_cells[idx]
            for a in range(8):
                for i in range(3):
                    xe[a, i] = nodes[cells[c, a], i]
            if cell_geometry(xe, dN, grads, detj) <= 0.0 and bad[part] < 0:
                bad[part] = c
            vol = 0.0
            qx = 0.0
            qy = 0.0
            qz = 0.0
            for q in range(nq):
                gp0 = 0.0
                gp1 = 0.0
                gp2 = 0.0
                for a in range(8):
                    pa = p_new[cells[c, a]]
                    gp0 += pa * grads[q, a, 0]
                    gp1 += pa * grads[q, a, 1]
                    gp2 += pa * grads[q, a, 2]
                v0 = -k_cell[c] * gp0
                v1 = -k_cell[c] * gp1
                v2 = -k_cell[c] * (gp2 + rho_g)
                wq = w[q] * detj[q]
                vol += wq
                qx += wq * v0
                qy += wq * v1
                qz += wq * v2
                vel[q, 0] = retard[c] * v0
                vel[q, 1] = retard[c] * v1
                vel[q, 2] = retard[c] * v2
            q_cell[c, 0] = qx / vol
            q_cell[c, 1] = qy / vol
            q_cell[c, 2] = qz / vol
            integrate_cell(N, w, vel, grads, detj, M, A, C, True)
            for a in range(8):
                s = 0.0
                for b in range(8):
                    vals[c, a, b] = M[a, b] + diff_h[c] * A[a, b] + h * C[a, b]
                    s += M[a, b] * t_old[cells[c, b]]
                rhs_el[c, a] = s
            if supg:
                D = diff_h[c] / h
                for q in range(nq):
                    speed = np.sqrt(vel[q, 0] ** 2 + vel[q, 1] ** 2 + vel[q, 2] ** 2)
                    if speed == 0.0:
                        continue
                    proj = 0.0
                    for a in range(8):
                        vgrad[a] = vel[q, 0] * grads[q, a, 0] + vel[q, 1] * grads[q, a, 1] + vel[q, 2] * grads[q, a, 2]
                        proj += abs(vgrad[a])
                    hc = 2.0 * speed / proj
                    peclet = speed * hc / (2.0 * D) if D > 0.0 else np.inf
                    tau = hc / (2.0 * speed) * min(1.0, peclet / 3.0)
                    wq = w[q] * detj[q] * tau
                    t_q = 0.0
                    for b in range(8):
                        t_q += N[q, b] * t_old[cells[c, b]]
                    for a in range(8):
                        for b in range(8):
                            vals[c, a, b] += wq * vgrad[a] * (N[q, b] + h * vgrad[b])
                        rhs_el[c, a] += wq * vgrad[a] * t_q
    return bad


def _check_bad(bad):
    hit = bad[bad >= 0]
    if len(hit):
        raise MeshError(f"cell {int(hit.min())} has a non-positive Jacobian determinant")


# --------------------------------------------------------------------------
# coefficients and boundary loads


def cell_coefficients(mesh, materials, fluid):
    """Per-cell mobility, B_poro, conductivity and heat capacity arrays."""
    n_mat = len(materials)
    if mesh.n_cells and int(mesh.cell_material.max()) >= n_mat:
        raise ConfigurationError(
            f"cell material id {int(mesh.cell_material.max())} has no material (only {n_mat} defined)"
        )
    table = np.array(
        [[mobility(m, fluid), m.B_poro, effective_lambda(m), effective_heat_capacity(m, fluid)] for m in materials]
    )
    if np.any(table[:, 3] <= 0):
        raise ConfigurationError("heat capacity c_T must be positive")
    per_cell = table[mesh.cell_material]
    return {"k": per_cell[:, 0].copy(), "B": per_cell[:, 1].copy(), "lambda": per_cell[:, 2].copy(),
            "c_T": per_cell[:, 3].copy()}


def face_integrals(mesh, marker, depth_range=None):
    """Integrals of the nodal shape functions over the faces of ``marker``.

    Returns ``(cells, nodes, weights)`` with ``nodes`` and ``weights`` of shape
    ``(k, 4)``: ``weights[f, i]`` is the integral of node ``nodes[f, i]``'s
    shape function over face ``f``. Faces whose centroid depth falls outside
    ``depth_range`` are dropped.
    """
    faces = mesh.boundary_faces.get(marker)
    if faces is None:
        raise ConfigurationError(f"unknown boundary marker {marker!r}")
    quads = mesh.face_nodes(marker)
    xf = mesh.nodes[quads]  # (k, 4, 3)
    if depth_range is not None:
        depth = -xf[:, :, 2].mean(axis=1)
        lo, hi = depth_range
        tol = 1e-9 * max(1.0, abs(hi))
        keep = (depth >= lo - tol) & (depth <= hi + tol)
        faces, quads, xf = faces[keep], quads[keep], xf[keep]
    g, gw = np.polynomial.legendre.leggauss(2)
    ref = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    weights = np.zeros(quads.shape)
    for s, ws in zip(g, gw):
        for t, wt in zip(g, gw):
            N = 0.25 * (1 + ref[:, 0] * s) * (1 + ref[:, 1] * t)
            dNs = 0.25 * ref[:, 0] * (1 + ref[:, 1] * t)
            dNt = 0.25 * ref[:, 1] * (1 + ref[:, 0] * s)
            xs = np.einsum("a,kai->ki", dNs, xf)
            xt = np.einsum("a,kai->ki", dNt, xf)
            dA = np.linalg.norm(np.cross(xs, xt), axis=1)
            weights += ws * wt * dA[:, None] * N[None, :]
    return faces[:, 0], quads, weights


def boundary_load(mesh, loads, per_cell_scale=None):
    """Nodal vector of ``sum value * (N, 1)_face`` over ``loads``.

    ``loads`` holds ``(marker, value, depth_range)`` triples; ``per_cell_scale``
    optionally rescales each face by a coefficient of its cell.
    """
    out = np.zeros(mesh.n_nodes)
    for marker, value, depth_range in loads:
        if value == 0.0:
            continue
        cells, quads, weights = face_integrals(mesh, marker, depth_range)
        contrib = value * weights
        if per_cell_scale is not None:
            contrib = contrib * per_cell_scale[cells][:, None]
        np.add.at(out, quads.ravel(), contrib.ravel())
    return out


def _normalize_loads(loads):
    if loads is None:
        return []
    if isinstance(loads, dict):
        return [(m, float(v), None) for m, v in loads.items()]
    return [(m, float(v), None if r is None else tuple(r)) for m, v, r in loads]


def _dirichlet_arrays(dirichlet):
    if not dirichlet:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if isinstance(dirichlet, dict):
        dofs = np.fromiter(dirichlet.keys(), dtype=np.int64, count=len(dirichlet))
        vals = np.fromiter(dirichlet.values(), dtype=float, count=len(dirichlet))
        return dofs, vals
    dofs, vals = dirichlet
    return np.asarray(dofs, dtype=np.int64), np.asarray(vals, dtype=float)


# --------------------------------------------------------------------------
# global systems


def assemble_pressure(mesh, materials, fluid, p_old, h, fluxes=None, dirichlet=None, order=2, cell_order=None,
                      coefficients=None):
    """Backward-Euler pressure system for one step of size ``h``.

    ``fluxes`` maps a boundary marker to an inward Darcy flux in m/s (or is a
    list of ``(marker, flux, depth_range)``); positive values inject water.
    """
    if h <= 0:
        raise ConfigurationError(f"time step must be positive, got {h}")
    p_old = np.ascontiguousarray(p_old, dtype=float)
    if len(p_old) != mesh.n_nodes:
        raise ConfigurationError(f"pressure vector has {len(p_old)} entries for {mesh.n_nodes} nodes")
    coef = coefficients or cell_coefficients(mesh, materials, fluid)
    pattern = dof_pattern(mesh)
    ref = reference(order)
    kBh = h * coef["k"] * coef["B"]
    grav = kBh * fluid.rho_w * fluid.g
    vals = np.empty((mesh.n_cells, 8, 8))
    rhs_el = np.empty((mesh.n_cells, 8))
    bad = _pressure_cells(mesh.nodes, mesh.cells, pattern.part_ptr, pattern.part_cells, ref.N, ref.dN, ref.weights,
                          kBh, grav, p_old, vals, rhs_el)
    _check_bad(bad)
    data = gather_matrix(pattern, vals, cell_order)
    rhs = gather_vector(pattern, rhs_el)
    rhs += boundary_load(mesh, _normalize_loads(fluxes), per_cell_scale=h * coef["B"])
    matrix = SparseMatrix(pattern.indptr, pattern.indices, data, (mesh.n_nodes, mesh.n_nodes), symmetric=True)
    dofs, values = _dirichlet_arrays(dirichlet)
    return AssembledSystem(matrix, rhs, dofs, values)


def assemble_temperature(mesh, materials, fluid, t_old, p_new, h, heat_fluxes=None, dirichlet=None, supg=False,
                         order=2, coefficients=None):
    """Backward-Euler temperature system advected by the Darcy flux of ``p_new``.

    ``heat_fluxes`` maps a boundary marker to an inward heat flux in W/m^2.
    Returns ``(system, q_cell)`` where ``q_cell`` is the cell-averaged Darcy flux.
    """
    if h <= 0:
        raise ConfigurationError(f"time step must be positive, got {h}")
    t_old = np.ascontiguousarray(t_old, dtype=float)
    p_new = np.ascontiguousarray(p_new, dtype=float)
    if len(t_old) != mesh.n_nodes or len(p_new) != mesh.n_nodes:
        raise ConfigurationError("temperature/pressure vectors do not match the mesh node count")
    coef = coefficients or cell_coefficients(mesh, materials, fluid)
    pattern = dof_pattern(mesh)
    ref = reference(order)
    diff_h = h * coef["lambda"] / coef["c_T"]
    retard = fluid.c_w / coef["c_T"]
    vals = np.empty((mesh.n_cells, 8, 8))
    rhs_el = np.empty((mesh.n_cells, 8))
    q_cell = np.empty((mesh.n_cells, 3))
    bad = _temperature_cells(mesh.nodes, mesh.cells, pattern.part_ptr, pattern.part_cells, ref.N, ref.dN,
                             ref.weights, coef["k"], diff_h, retard, fluid.rho_w * fluid.g, float(h), p_new, t_old,
                             bool(supg), vals, rhs_el, q_cell)
    _check_bad(bad)
    data = gather_matrix(pattern, vals)
    rhs = gather_vector(pattern, rhs_el)
    rhs += boundary_load(mesh, _normalize_loads(heat_fluxes), per_cell_scale=h / coef["c_T"])
    matrix = SparseMatrix(pattern.indptr, pattern.indices, data, (mesh.n_nodes, mesh.n_nodes), symmetric=False)
    dofs, values = _dirichlet_arrays(dirichlet)
    return AssembledSystem(matrix, rhs, dofs, values), q_cell


def darcy_flux_at_cells(mesh, materials, fluid, p, order=2):
    """Cell-averaged Darcy flux of a pressure field."""
    coef = cell_coefficients(mesh, materials, fluid)
    ref = reference(order)
    xe = mesh.nodes[mesh.cells]
    _, dN = ref.N, ref.dN
    # J[c, q, i, j] = sum_a x[c, a, i] dN[q, a, j]
    J = np.einsum("cai,qaj->cqij", xe, dN)
    Jinv = np.linalg.inv(J)
    detj = np.linalg.det(J)
    grads = np.einsum("qaj,cqji->cqai", dN, Jinv)
    gp = np.einsum("cqai,ca->cqi", grads, p[mesh.cells])
    gp[..., 2] += fluid.rho_w * fluid.g
    wq = detj * ref.weights
    q = -coef["k"][:, None] * np.einsum("cq,cqi->ci", wq, gp) / wq.sum(axis=1)[:, None]
    return q


def apply_dirichlet(system, symmetrize=False):
    """Impose the recorded Dirichlet values.

    Constrained rows become identity rows with the prescribed value on the
    right-hand side. With ``symmetrize`` the constrained columns are also
    moved to the right-hand side so a symmetric matrix stays symmetric.
    """
    dofs, values = system.dirichlet_dofs, system.dirichlet_values
    if len(dofs) == 0:
        return system
    order = np.argsort(dofs, kind="stable")
    d_sorted, v_sorted = dofs[order], values[order]
    dup = np.flatnonzero(d_sorted[1:] == d_sorted[:-1])
    if len(dup):
        conflict = dup[v_sorted[dup] != v_sorted[dup + 1]]
        if len(conflict):
            i = conflict[0]
            raise ConfigurationError(
                f"dof {d_sorted[i]} constrained to conflicting values {v_sorted[i]} and {v_sorted[i + 1]}"
            )
    A = system.matrix
    n = A.shape[0]
    mask = np.zeros(n, dtype=bool)
    mask[dofs] = True
    g = np.zeros(n)
    g[dofs] = values
    data = A.data.copy()
    rhs = system.rhs.copy()
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    if symmetrize:
        col_fixed = mask[A.indices] & ~mask[rows]
        rhs -= np.bincount(rows[col_fixed], weights=data[col_fixed] * g[A.indices[col_fixed]], minlength=n)
        data[col_fixed] = 0.0
    row_fixed = mask[rows]
    data[row_fixed] = np.where(A.indices[row_fixed] == rows[row_fixed], 1.0, 0.0)
    rhs[mask] = g[mask]
    return AssembledSystem(A.with_data(data), rhs, dofs, values, constrained=True)


__all__ = [
    "AssembledSystem",
    "DofPattern",
    "ElementMatrices",
    "FACE_NODES",
    "apply_dirichlet",
    "assemble_pressure",
    "assemble_temperature",
    "boundary_load",
    "cell_coefficients",
    "darcy_flux_at_cells",
    "dof_pattern",
    "element_matrices",
    "face_integrals",
]
