"""Structured hexahedral meshes over layered boxes and wedges.

Coordinates: z points up with the ground surface at z = 0, so depth = -z.
Layers are numbered from the top, starting at 0.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .element import FACE_NODES, REF_NODES, cell_volumes_and_min_det, reference, shape_functions
from .errors import ConfigurationError, MeshError

BOX_MARKERS = ("bottom", "top", "ymin", "xmax", "ymax", "xmin")  # indexed like FACE_NODES
WEDGE_MARKERS = ("bottom", "top", "side", "outer", "side", "wellbore")


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable hexahedral mesh.

    ``boundary_faces`` maps a marker to an ``(k, 2)`` array of
    ``(cell, local face)`` pairs; ``node_regions`` maps a region name to
    sorted node ids. ``partition`` and ``ghost_cells`` are set by
    :func:`partition`.
    """

    nodes: np.ndarray
    cells: np.ndarray
    cell_material: np.ndarray
    boundary_faces: dict = field(default_factory=dict)
    node_regions: dict = field(default_factory=dict)
    partition: Optional[np.ndarray] = None
    ghost_cells: Optional[tuple] = None
    shape: Optional[tuple] = None  # logical (n0, n1, n2) cell counts

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_workers(self):
        return 1 if self.partition is None else int(self.partition.max()) + 1

    @cached_property
    def cell_volumes(self):
        ref = reference(2)
        return cell_volumes_and_min_det(self.nodes, self.cells, ref.dN, ref.weights)[0]

    @cached_property
    def centroids(self):
        return self.nodes[self.cells].mean(axis=1)

    @cached_property
    def bounds(self):
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def face_nodes(self, marker):
        """Node quads ``(k, 4)`` of the faces carrying ``marker``."""
        faces = self.boundary_faces.get(marker)
        if faces is None:
            raise ConfigurationError(f"unknown boundary marker {marker!r}")
        return self.cells[faces[:, 0][:, None], FACE_NODES[faces[:, 1]]]

    def marker_nodes(self, marker):
        """Sorted node ids on a boundary marker or inside a node region."""
        if marker in self.node_regions:
            return self.node_regions[marker]
        return np.unique(self.face_nodes(marker))

    @property
    def markers(self):
        return set(self.boundary_faces) | set(self.node_regions)

    def owned_cells(self, worker):
        if self.partition is None:
            return np.arange(self.n_cells)
        return np.flatnonzero(self.partition == worker)


@dataclass(frozen=True)
class ObservationLine:
    name: str
    start: tuple
    end: tuple
    sample_count: int = 50

    def __post_init__(self):
        if self.sample_count < 2:
            raise ConfigurationError(f"observation line {self.name!r}: sample_count must be >= 2")
        if len(self.start) != 3 or len(self.end) != 3:
            raise ConfigurationError(f"observation line {self.name!r}: endpoints must be 3-vectors")

    @property
    def length(self):
        return float(np.linalg.norm(np.subtract(self.end, self.start)))

    def points(self):
        s = np.linspace(0.0, 1.0, self.sample_count)
        a, b = np.asarray(self.start, float), np.asarray(self.end, float)
        return s * self.length, a + s[:, None] * (b - a)

    def to_dict(self):
        return {"name": self.name, "start": list(self.start), "end": list(self.end), "sample_count": self.sample_count}


# --------------------------------------------------------------------------
# generation


def _check_interfaces(interfaces, depth):
    interfaces = np.asarray(sorted(interfaces), dtype=float)
    if np.any(interfaces <= 0) or np.any(interfaces >= depth):
        raise ConfigurationError(f"layer interfaces {interfaces.tolist()} must lie strictly inside (0, {depth})")
    if np.any(np.diff(interfaces) <= 0):
        raise ConfigurationError(f"layer interfaces must be strictly increasing: {interfaces.tolist()}")
    return interfaces


def layered_depths(depth, interfaces, nz, extra_depths=()):
    """Depth planes (increasing) containing every interface and ``extra_depths``.

    Each layer gets ``round(thickness / depth * nz)`` cells, at least one.
    """
    interfaces = _check_interfaces(interfaces, depth)
    bounds = np.concatenate([[0.0], interfaces, [depth]])
    planes = [0.0]
    for top, bottom in zip(bounds[:-1], bounds[1:]):
        n = max(1, int(round((bottom - top) / depth * nz)))
        planes.extend(np.linspace(top, bottom, n + 1)[1:])
    planes = np.asarray(planes)
    for d in extra_depths:
        if 0 < d < depth and np.min(np.abs(planes - d)) > 1e-9 * depth:
            planes = np.sort(np.append(planes, d))
    return planes


def graded_axis(length, base_spacing, features=(), growth=1.3):
    """Node coordinates on [0, length] refined around ``features``.

    ``features`` is a sequence of ``(position, fine_spacing)``; each position
    becomes a node and the spacing grows geometrically by ``growth`` away from
    it until it reaches ``base_spacing``.
    """
    if length <= 0 or base_spacing <= 0:
        raise ConfigurationError("axis length and spacing must be positive")
    feats = [(float(p), float(h)) for p, h in features if 0.0 <= p <= length]

    def spacing(x):
        s = base_spacing
        for p, h in feats:
            d = abs(x - p)
            # distance covered by a geometric ramp from h to s
            s = min(s, h + (growth - 1.0) * d)
        return max(s, 1e-12)

    fixed = sorted({0.0, length, *[p for p, _ in feats]})
    coords = [0.0]
    for a, b in zip(fixed[:-1], fixed[1:]):
        if b - a < 1e-9 * length:
            continue
        pts = [a]
        while True:
            x = pts[-1]
            h = spacing(x)
            if x + 1.5 * h >= b:
                break
            pts.append(x + h)
        pts.append(b)
        pts = np.asarray(pts)
        # stretch so the last interval lands exactly on b
        pts = a + (pts - a) * (b - a) / (pts[-1] - a)
        coords.extend(pts[1:])
    return np.asarray(coords)


def _structured(xc, yc, depth_planes, interfaces, mapping=None, marker_names=BOX_MARKERS):
    """Tensor-product hexahedra; ``mapping(X, Y, Z)`` may bend the logical grid."""
    nx, ny, nz = len(xc) - 1, len(yc) - 1, len(depth_planes) - 1
    zc = -np.asarray(depth_planes)[::-1]  # ascending, bottom first
    Z, Y, X = np.meshgrid(zc, yc, xc, indexing="ij")
    X, Y, Z = X.ravel(), Y.ravel(), Z.ravel()
    if mapping is not None:
        X, Y, Z = mapping(X, Y, Z)
    nodes = np.column_stack([X, Y, Z])

    def nid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    cells = np.column_stack(
        [
            nid(i, j, k),
            nid(i + 1, j, k),
            nid(i + 1, j + 1, k),
            nid(i, j + 1, k),
            nid(i, j, k + 1),
            nid(i + 1, j, k + 1),
            nid(i + 1, j + 1, k + 1),
            nid(i, j + 1, k + 1),
        ]
    ).astype(np.int64)

    centroid_depth = -0.5 * (zc[k] + zc[k + 1])
    material = np.searchsorted(np.asarray(interfaces, float), centroid_depth).astype(np.int64)

    cell_id = np.arange(len(cells))
    on_face = [k == 0, k == nz - 1, j == 0, i == nx - 1, j == ny - 1, i == 0]
    boundary = {}
    for lf, (name, mask) in enumerate(zip(marker_names, on_face)):
        pairs = np.column_stack([cell_id[mask], np.full(mask.sum(), lf)])
        boundary[name] = np.vstack([boundary[name], pairs]) if name in boundary else pairs
    mesh = Mesh(nodes=nodes, cells=cells, cell_material=material, boundary_faces=boundary, shape=(nx, ny, nz))
    check_jacobians(mesh)
    return mesh


def check_jacobians(mesh, order=2):
    ref = reference(order)
    _, dmin = cell_volumes_and_min_det(mesh.nodes, mesh.cells, ref.dN, ref.weights)
    bad = np.flatnonzero(dmin <= 0.0)
    if len(bad):
        raise MeshError(f"cell {bad[0]} has a non-positive Jacobian determinant ({len(bad)} inverted cells)")


def generate_layered_box(extent, layer_interfaces=(), base_resolution=(1, 1, 1), x_coords=None, y_coords=None,
                         extra_depths=()):
    """Box ``[0, Lx] x [0, Ly] x [-Lz, 0]`` whose z-planes include every layer interface.

    ``x_coords``/``y_coords`` override the uniform horizontal spacing (e.g. from
    :func:`graded_axis`).
    """
    Lx, Ly, Lz = map(float, extent)
    nx, ny, nz = map(int, base_resolution)
    if min(Lx, Ly, Lz) <= 0:
        raise ConfigurationError(f"box extent must be positive, got {extent}")
    if min(nx, ny, nz) < 1:
        raise ConfigurationError(f"resolution must be >= 1, got {base_resolution}")
    xc = np.linspace(0.0, Lx, nx + 1) if x_coords is None else np.asarray(x_coords, float)
    yc = np.linspace(0.0, Ly, ny + 1) if y_coords is None else np.asarray(y_coords, float)
    for name, c, L in (("x", xc, Lx), ("y", yc, Ly)):
        if np.any(np.diff(c) <= 0) or abs(c[0]) > 1e-9 * L or abs(c[-1] - L) > 1e-9 * L:
            raise ConfigurationError(f"{name}_coords must increase from 0 to {L}")
    interfaces = _check_interfaces(layer_interfaces, Lz)
    planes = layered_depths(Lz, interfaces, nz, extra_depths)
    return _structured(xc, yc, planes, interfaces)


def radial_coords(inner_radius, radius, n_r, grading=1.0):
    """Geometric radial spacing: each interval is ``grading`` times the previous."""
    if grading == 1.0:
        return np.linspace(inner_radius, radius, n_r + 1)
    widths = grading ** np.arange(n_r)
    r = inner_radius + (radius - inner_radius) * np.concatenate([[0.0], np.cumsum(widths)]) / widths.sum()
    r[-1] = radius
    return r


def generate_wedge(radius, depth, wedge_angle=2.0, layer_interfaces=(), grading=1.0, n_r=40, n_z=60,
                   inner_radius=0.1):
    """One-element-thick wedge around the z axis, symmetric about the x axis.

    Node radii are scaled by ``sqrt(angle / sin(angle))`` so each straight-sided
    cell has exactly the volume of its annular sector. The inner face is
    marked ``wellbore``, the outer ``outer``, the two flat sides ``side``.
    """
    if not 0.0 < wedge_angle <= 10.0:
        raise ConfigurationError(f"wedge_angle must lie in (0, 10] degrees, got {wedge_angle}")
    if grading < 1.0:
        raise ConfigurationError(f"grading must be >= 1, got {grading}")
    if not 0.0 < inner_radius < radius or depth <= 0 or n_r < 1 or n_z < 1:
        raise ConfigurationError(
            f"degenerate wedge: inner_radius={inner_radius}, radius={radius}, depth={depth}, n_r={n_r}, n_z={n_z}"
        )
    alpha = np.radians(wedge_angle)
    scale = np.sqrt(alpha / np.sin(alpha))
    rc = radial_coords(inner_radius, radius, n_r, grading)
    interfaces = _check_interfaces(layer_interfaces, depth)
    planes = layered_depths(depth, interfaces, n_z)

    def to_cartesian(R, S, Z):
        theta = (S - 0.5) * alpha
        rho = R * scale
        return rho * np.cos(theta), rho * np.sin(theta), Z

    return _structured(rc, np.array([0.0, 1.0]), planes, interfaces, mapping=to_cartesian,
                       marker_names=WEDGE_MARKERS)


def radial_distance(mesh_or_points, wedge_angle):
    """Nominal radius of wedge nodes (undoes the area-preserving scaling)."""
    pts = mesh_or_points.nodes if isinstance(mesh_or_points, Mesh) else np.asarray(mesh_or_points)
    alpha = np.radians(wedge_angle)
    return np.hypot(pts[..., 0], pts[..., 1]) / np.sqrt(alpha / np.sin(alpha))


def wedge_point(r, z, wedge_angle):
    """Cartesian point on the wedge mid-plane at nominal radius ``r``.

    Cells are straight-sided, so the mid-plane is the chord between the two
    side faces and sits a factor cos(angle/2) inside the node arcs.
    """
    alpha = np.radians(wedge_angle)
    return (r * np.sqrt(alpha / np.sin(alpha)) * np.cos(alpha / 2), 0.0, z)


# --------------------------------------------------------------------------
# regions and partitioning


def mark_pile_regions(mesh, piles):
    """Mark nodes inside each pile as regions ``pile_<i>`` and their union ``pile``.

    ``piles`` is a sequence of ``(center_xy, radius, length)``. Returns the new
    mesh and the per-pile node counts.
    """
    lo, hi = mesh.bounds
    xy = mesh.nodes[:, :2]
    depth = -mesh.nodes[:, 2]
    tol = 1e-9 * max(hi - lo)
    regions = dict(mesh.node_regions)
    counts = []
    union = np.zeros(mesh.n_nodes, dtype=bool)
    for i, (center, radius, length) in enumerate(piles):
        cx, cy = center
        if not (lo[0] - tol <= cx <= hi[0] + tol and lo[1] - tol <= cy <= hi[1] + tol):
            raise ConfigurationError(f"pile {i} at ({cx}, {cy}) lies outside the mesh footprint")
        inside = (np.hypot(xy[:, 0] - cx, xy[:, 1] - cy) <= radius + tol) & (depth <= length + tol)
        n = int(inside.sum())
        if n == 0:
            raise ConfigurationError(f"pile {i} at ({cx}, {cy}) captures no mesh nodes; refine the mesh near it")
        regions[f"pile_{i}"] = np.flatnonzero(inside)
        union |= inside
        counts.append(n)
    regions["pile"] = np.flatnonzero(union)
    return replace(mesh, node_regions=regions), counts


def _bisect(cell_ids, centroids, workers, first_worker, owner):
    if workers == 1:
        owner[cell_ids] = first_worker
        return
    pts = centroids[cell_ids]
    axis = int(np.argmax(pts.max(axis=0) - pts.min(axis=0)))
    order = np.lexsort((cell_ids, pts[:, axis]))
    left_workers = workers // 2
    n_left = int(round(len(cell_ids) * left_workers / workers))
    _bisect(cell_ids[order[:n_left]], centroids, left_workers, first_worker, owner)
    _bisect(cell_ids[order[n_left:]], centroids, workers - left_workers, first_worker + left_workers, owner)


def partition(mesh, workers):
    """Recursive coordinate bisection of the cells into ``workers`` owners."""
    workers = int(workers)
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    if workers > mesh.n_cells:
        raise ConfigurationError(f"cannot split {mesh.n_cells} cells among {workers} workers")
    owner = np.empty(mesh.n_cells, dtype=np.int64)
    _bisect(np.arange(mesh.n_cells), mesh.centroids, workers, 0, owner)
    ghosts = []
    for w in range(workers):
        touched = np.zeros(mesh.n_nodes, dtype=bool)
        touched[mesh.cells[owner == w].ravel()] = True
        near = touched[mesh.cells].any(axis=1) & (owner != w)
        ghosts.append(np.flatnonzero(near))
    return replace(mesh, partition=owner, ghost_cells=tuple(ghosts))


# --------------------------------------------------------------------------
# sampling


def _locate(xe, p, iters=25):
    """Reference coordinates of ``p`` in the cell with nodes ``xe`` (Newton)."""
    xi = np.zeros(3)
    for _ in range(iters):
        N, dN = shape_functions(xi)
        r = N[0] @ xe - p
        J = xe.T @ dN[0]
        step = np.linalg.solve(J, r)
        xi -= step
        if np.max(np.abs(step)) < 1e-14:
            break
    return xi


def sample_line(mesh, field, line):
    """Interpolate a nodal field along ``line``.

    Returns ``(arc_length, points, values)``; values at points outside the
    mesh are NaN. ``field`` may be ``(n_nodes,)`` or ``(n_nodes, k)``.
    """
    field = np.asarray(field, dtype=float)
    if field.shape[0] != mesh.n_nodes:
        raise ConfigurationError(f"field has {field.shape[0]} values for {mesh.n_nodes} nodes")
    if line.length == 0.0:
        raise ConfigurationError(f"observation line {line.name!r} has zero length")
    arc, pts = line.points()
    xe_all = mesh.nodes[mesh.cells]
    lo_c, hi_c = xe_all.min(axis=1), xe_all.max(axis=1)
    lo, hi = mesh.bounds
    tol = 1e-9 * float(np.max(hi - lo))
    values = np.full((len(pts),) + field.shape[1:], np.nan)
    for s, p in enumerate(pts):
        candidates = np.flatnonzero(np.all((lo_c - tol <= p) & (p <= hi_c + tol), axis=1))
        for c in candidates:
            xi = _locate(xe_all[c], p)
            if np.all(np.abs(xi) <= 1.0 + 1e-9):
                N, _ = shape_functions(np.clip(xi, -1.0, 1.0))
                values[s] = N[0] @ field[mesh.cells[c]]
                break
    return arc, pts, values


__all__ = [
    "Mesh",
    "ObservationLine",
    "REF_NODES",
    "check_jacobians",
    "generate_layered_box",
    "generate_wedge",
    "graded_axis",
    "layered_depths",
    "mark_pile_regions",
    "partition",
    "radial_coords",
    "sample_line",
]
