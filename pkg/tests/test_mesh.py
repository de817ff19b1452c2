import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydrotherm.errors import ConfigurationError
from hydrotherm.mesh import (
    ObservationLine,
    check_jacobians,
    generate_layered_box,
    generate_wedge,
    mark_pile_regions,
    partition,
    radial_distance,
    sample_line,
)


def test_single_cell_box():
    m = generate_layered_box((1, 1, 1))
    assert (m.n_cells, m.n_nodes) == (1, 8)
    assert m.cell_volumes.sum() == pytest.approx(1.0, rel=1e-14)
    assert set(m.boundary_faces) == {"top", "bottom", "xmin", "xmax", "ymin", "ymax"}


def test_one_cell_per_layer_top_down_ids():
    m = generate_layered_box((1, 1, 3), [1, 2], (1, 1, 3))
    order = np.argsort(-m.centroids[:, 2])  # top first
    assert m.cell_material[order].tolist() == [0, 1, 2]


@pytest.mark.parametrize("bad", [[0.0], [3.0], [-1.0], [2.0, 1.0, 2.0]])
def test_interfaces_outside_domain_rejected(bad):
    with pytest.raises(ConfigurationError):
        generate_layered_box((1, 1, 3), bad, (1, 1, 3))


@given(nx=st.integers(1, 5), ny=st.integers(1, 5), nz=st.integers(1, 6),
       L=st.tuples(st.floats(0.5, 50), st.floats(0.5, 50), st.floats(0.5, 50)))
def test_box_volume_closure(nx, ny, nz, L):
    m = generate_layered_box(L, [L[2] / 3.0], (nx, ny, nz))
    assert m.cell_volumes.sum() == pytest.approx(L[0] * L[1] * L[2], rel=1e-12)


@given(nz=st.integers(1, 8), interfaces=st.lists(st.floats(0.05, 0.95), min_size=1, max_size=3, unique=True))
def test_interfaces_coincide_with_planes(nz, interfaces):
    interfaces = sorted(interfaces)
    if np.any(np.diff(interfaces) < 1e-3):
        return
    m = generate_layered_box((1, 1, 1), interfaces, (1, 1, nz))
    z = np.unique(np.round(m.nodes[:, 2], 12))
    for d in interfaces:
        assert np.min(np.abs(z + d)) < 1e-12
    # no cell straddles an interface: all nodes of a cell lie within its layer band
    bands = np.concatenate([[0.0], interfaces, [1.0]])
    depth = -m.nodes[m.cells][:, :, 2]
    lo, hi = bands[m.cell_material], bands[m.cell_material + 1]
    assert np.all(depth >= lo[:, None] - 1e-12) and np.all(depth <= hi[:, None] + 1e-12)


def test_wedge_benchmark_geometry():
    m = generate_wedge(20.0, 300.0, 2.0, [100.0, 200.0], n_r=40, n_z=30)
    check_jacobians(m)
    assert sorted(set(m.cell_material.tolist())) == [0, 1, 2]
    r = radial_distance(m, 2.0)
    assert r.min() == pytest.approx(0.1) and r.max() == pytest.approx(20.0)
    assert "wellbore" in m.boundary_faces
    assert np.allclose(radial_distance(m.nodes[m.marker_nodes("wellbore")], 2.0), 0.1)


def test_wedge_uniform_spacing_when_grading_is_one():
    m = generate_wedge(20.0, 300.0, 2.0, grading=1.0, n_r=10, n_z=3)
    r = np.unique(np.round(radial_distance(m, 2.0), 9))
    assert np.allclose(np.diff(r), np.diff(r)[0])


@given(angle=st.floats(0.5, 10.0), grading=st.floats(1.0, 1.3), n_r=st.integers(2, 30))
def test_wedge_volume_is_annular_sector(angle, grading, n_r):
    R, depth, rw = 20.0, 300.0, 0.1
    m = generate_wedge(R, depth, angle, grading=grading, n_r=n_r, n_z=3, inner_radius=rw)
    exact = 0.5 * math.radians(angle) * (R * R - rw * rw) * depth
    assert m.cell_volumes.sum() == pytest.approx(exact, rel=1e-10)
    check_jacobians(m)


@pytest.mark.parametrize("kw", [{"wedge_angle": 0.0}, {"wedge_angle": 12.0}, {"grading": 0.9}, {"n_r": 0}])
def test_wedge_rejects_bad_input(kw):
    args = dict(radius=20.0, depth=300.0)
    args.update(kw)
    with pytest.raises(ConfigurationError):
        generate_wedge(**args)


def test_pile_marking():
    m = generate_layered_box((10, 10, 10), (), (10, 10, 10))
    marked, counts = mark_pile_regions(m, [((5.0, 5.0), 1.5, 6.0)])
    assert counts[0] > 0
    assert np.all(-marked.nodes[marked.node_regions["pile"], 2] <= 6.0 + 1e-9)
    with pytest.raises(ConfigurationError, match="outside"):
        mark_pile_regions(m, [((50.0, 5.0), 1.0, 5.0)])
    with pytest.raises(ConfigurationError, match="pile 0"):
        mark_pile_regions(m, [((5.5, 5.5), 0.1, 5.0)])


def test_desk_pile_sets_disjoint():
    from hydrotherm.scenarios import build_mesh, build_pile_field

    mesh = build_mesh(build_pile_field("desk"))
    sets = [set(mesh.node_regions[f"pile_{i}"].tolist()) for i in range(9)]
    assert all(sets)
    for i in range(9):
        for j in range(i + 1, 9):
            assert not sets[i] & sets[j]


def test_partition_single_worker():
    m = partition(generate_layered_box((4, 1, 1), (), (4, 1, 1)), 1)
    assert np.all(m.partition == 0)
    assert len(m.ghost_cells[0]) == 0


def test_partition_two_workers_by_hand():
    m = partition(generate_layered_box((4, 1, 1), (), (4, 1, 1)), 2)
    order = np.argsort(m.centroids[:, 0])
    assert m.partition[order].tolist() == [0, 0, 1, 1]
    assert [len(g) for g in m.ghost_cells] == [1, 1]


def test_partition_too_many_workers():
    with pytest.raises(ConfigurationError):
        partition(generate_layered_box((1, 1, 1)), 2)


@pytest.mark.parametrize("workers", [2, 3, 4, 8])
def test_partition_is_disjoint_cover_with_true_ghosts(workers):
    base = generate_layered_box((1, 1, 1), (), (10, 10, 10))
    m = partition(base, workers)
    counts = np.bincount(m.partition, minlength=workers)
    assert counts.sum() == m.n_cells and len(counts) == workers
    assert counts.max() - counts.min() <= 1
    for w, ghosts in enumerate(m.ghost_cells):
        owned_nodes = set(m.cells[m.partition == w].ravel().tolist())
        assert np.all(m.partition[ghosts] != w)
        for c in ghosts:
            assert owned_nodes & set(m.cells[c].tolist())
    again = partition(base, workers)
    assert np.array_equal(again.partition, m.partition)


def test_sample_line_constant_and_linear():
    m = generate_layered_box((2, 2, 3), (), (2, 3, 4))
    line = ObservationLine("v", (0.7, 1.3, 0.0), (0.7, 1.3, -3.0), 13)
    _, _, v = sample_line(m, np.full(m.n_nodes, 4.5), line)
    assert np.allclose(v, 4.5)
    _, pts, v = sample_line(m, m.nodes[:, 2], line)
    assert np.allclose(v, pts[:, 2], atol=1e-12)


def test_sample_line_bilinear_on_unit_cell():
    m = generate_layered_box((1, 1, 1))
    f = m.nodes[:, 0] * m.nodes[:, 1]
    line = ObservationLine("d", (0, 0, -0.5), (1, 1, -0.5), 3)
    arc, _, v = sample_line(m, f, line)
    assert v == pytest.approx([0.0, 0.25, 1.0], abs=1e-12)
    assert arc == pytest.approx([0.0, math.sqrt(2) / 2, math.sqrt(2)])


def test_sample_line_outside_is_absent_and_zero_length_rejected():
    m = generate_layered_box((1, 1, 1))
    _, _, v = sample_line(m, np.ones(8), ObservationLine("o", (0.5, 0.5, -0.5), (2.5, 0.5, -0.5), 5))
    assert not np.isnan(v[0]) and np.isnan(v[-1])
    with pytest.raises(ConfigurationError, match="zero length"):
        sample_line(m, np.ones(8), ObservationLine("z", (0.5, 0.5, -0.5), (0.5, 0.5, -0.5), 2))


@given(coef=st.tuples(*[st.floats(-5, 5)] * 4),
       ends=st.tuples(*[st.floats(0.0, 1.0)] * 6))
def test_linear_fields_reproduced_on_graded_wedge(coef, ends):
    m = generate_wedge(20.0, 30.0, 2.0, grading=1.2, n_r=6, n_z=3)
    a, b, c, d = coef
    f = a + b * m.nodes[:, 0] + c * m.nodes[:, 1] + d * m.nodes[:, 2]
    r0, r1 = 0.2 + 19.8 * ends[0], 0.2 + 19.8 * ends[1]
    z0, z1 = -30 * ends[2], -30 * ends[3]
    from hydrotherm.mesh import wedge_point

    line = ObservationLine("l", wedge_point(r0, z0, 2.0), wedge_point(r1, z1, 2.0), 7)
    if line.length == 0:
        return
    _, pts, v = sample_line(m, f, line)
    ok = ~np.isnan(v)
    exact = a + b * pts[:, 0] + c * pts[:, 1] + d * pts[:, 2]
    assert ok.all()
    assert np.allclose(v, exact, atol=1e-9 * (1 + abs(b) * 20 + abs(d) * 30))
