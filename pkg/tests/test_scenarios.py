import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import box_config, dirichlet
from hydrotherm.errors import ConfigurationError
from hydrotherm.scenarios import (
    BUILDERS,
    DAY,
    YEAR,
    BoundaryCondition,
    Layer,
    ScenarioConfig,
    Schedule,
    build_ates_benchmark,
    build_mesh,
    build_pile_field,
    evaluate_schedule,
    layer_stack_depths,
    placeholder_monthly_surface,
    treasure_island_layers,
)
from hydrotherm.physics import Material

PILE = Schedule("square_wave", mean=288.55, amplitude=13.0, period=YEAR, hot_first=True)


def test_square_wave_values():
    assert evaluate_schedule(PILE, 0.0) == 301.55
    assert evaluate_schedule(PILE, 10 * DAY) == 301.55
    assert evaluate_schedule(PILE, 200 * DAY) == 275.55
    assert evaluate_schedule(Schedule("constant", 287.45), 1e9) == 287.45


@given(st.floats(0, 20 * YEAR))
def test_square_wave_two_levels(t):
    v = evaluate_schedule(PILE, t)
    assert v == (301.55 if math.fmod(t, YEAR) < 0.5 * YEAR else 275.55)


def test_monthly_table_starts_at_start_month():
    vals = tuple(float(i) for i in range(1, 13))
    s = Schedule("monthly_table", values=vals, start_month=5, period=YEAR)
    month = YEAR / 12
    assert evaluate_schedule(s, 0.0) == 5.0
    assert evaluate_schedule(s, 1.5 * month) == 6.0
    assert evaluate_schedule(s, 8.0 * month) == 1.0
    assert evaluate_schedule(s, YEAR) == 5.0


def test_placeholder_surface_table():
    vals = placeholder_monthly_surface()
    assert len(vals) == 12
    assert np.mean(vals) == pytest.approx(287.45, abs=1e-12)
    assert vals[4] == 287.65


def test_linear_profile_needs_points():
    s = Schedule("linear_gradient_profile", value=278.15, depth_gradient=0.05)
    assert evaluate_schedule(s, 0.0, np.array([[0.0, 0.0, -300.0]]))[0] == pytest.approx(293.15)
    with pytest.raises(ConfigurationError, match="spatial"):
        evaluate_schedule(s, 0.0)


@pytest.mark.parametrize("kw", [{"kind": "sine"}, {"kind": "square_wave", "mean": 1.0},
                                {"kind": "square_wave", "mean": 1.0, "amplitude": 1.0, "period": 0.0},
                                {"kind": "monthly_table", "values": (1.0,) * 11}])
def test_schedule_validation(kw):
    with pytest.raises(ConfigurationError):
        Schedule(**kw)


def test_negative_time_rejected():
    with pytest.raises(ConfigurationError):
        evaluate_schedule(PILE, -1.0)


def test_ates_builder_echoes_parameters():
    cfg = build_ates_benchmark("coarse")
    names = [l.material.name for l in cfg.layers]
    assert names == ["caprock", "aquifer", "basement"]
    assert cfg.layers[1].material.K == 1e-6
    assert cfg.layers[0].material.K == 1e-10 and cfg.layers[2].material.K == 1e-10
    assert cfg.time.t_end == 180 * DAY
    assert cfg.geometry.radius == 20.0 and cfg.geometry.depth == 300.0
    assert cfg.fluid.c_w == 1e6
    m = cfg.layers[1].material
    assert (m.cT_direct, m.lambda_direct, m.B_poro) == (1.2e6, 1.2, 1e5)
    wb = [bc for bc in cfg.boundary_conditions if bc.marker == "wellbore"]
    assert {bc.kind: bc.schedule.value for bc in wb} == {"flux": 1e-3, "dirichlet": 288.15}
    assert all(bc.depth_range == (100.0, 200.0) for bc in wb)


def test_pile_builders():
    full, desk = build_pile_field("full"), build_pile_field("desk")
    assert len(full.piles) == 1130 and len(desk.piles) == 9
    assert all(p.radius == 0.75 and p.length == 60.0 for p in full.piles)
    flux = [bc for bc in desk.boundary_conditions if bc.kind == "flux"]
    assert [(bc.marker, bc.schedule.value) for bc in flux] == [("bottom", 0.89)]
    obm = next(l.material for l in desk.layers if l.material.name == "Old Bay mud")
    assert obm.lambda_direct == 1.7
    # lateral pressure drop across the full span
    pbc = next(bc for bc in full.boundary_conditions if bc.marker == "xmax")
    drop = pbc.schedule.lateral_gradient[0] * full.geometry.extent[0]
    assert drop == pytest.approx(8500.0)
    assert next(bc for bc in desk.boundary_conditions if bc.marker == "xmax").schedule.lateral_gradient[0] == 5.0
    # variants share every material
    assert [l.to_dict() for l in full.layers] == [l.to_dict() for l in desk.layers]
    names = [l.name for l in desk.observation_lines]
    assert names == ["O-1", "O-2", "O-3", "O-4", "O-5", "O-6"]


def test_full_scale_piles_are_distinct_and_on_island():
    cfg = build_pile_field("full")
    c = np.array([p.center for p in cfg.piles])
    assert len(np.unique(c, axis=0)) == 1130
    margin = cfg.geometry.island_margin
    assert np.all(c[:, 0] > margin) and np.all(c[:, 0] < cfg.geometry.extent[0] - margin)
    assert np.all(c[:, 1] > margin) and np.all(c[:, 1] < cfg.geometry.extent[1] - margin)


def test_layer_stack_depths():
    cfg = build_pile_field("desk")
    stack = layer_stack_depths(cfg)
    assert [s[0] for s in stack] == ["Fill", "Shoal", "Young Bay mud", "Old Bay mud", "Franciscan bedrock"]
    assert [(s[1], s[2]) for s in stack] == [(0, 10), (10, 15), (15, 40), (40, 75), (75, 100)]
    franciscan = stack[-1]
    assert 70 <= franciscan[1] <= 80
    assert stack[-1][2] == 100
    tip = next(s for s in stack if s[1] <= 60.0 < s[2])
    assert tip[0] == "Old Bay mud"


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_round_trip_json(name, tmp_path):
    cfg = BUILDERS[name]()
    path = tmp_path / "c.json"
    cfg.to_json(path)
    again = ScenarioConfig.from_json(path)
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_validation_errors():
    with pytest.raises(ConfigurationError, match="marker"):
        box_config(bcs=[dirichlet("temperature", "nowhere", 1.0)])
    with pytest.raises(ConfigurationError, match="thickness"):
        box_config(layers=(Layer(0.5, Material("a", K=1e-6)),))
    with pytest.raises(ConfigurationError, match="missing config field"):
        ScenarioConfig.from_dict({"name": "x"})


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigurationError, match="invalid JSON"):
        ScenarioConfig.from_json(p)


def test_desk_mesh_markers_and_size():
    cfg = build_pile_field("desk")
    mesh = build_mesh(cfg)
    assert {"pile", "island_top", "sea_top", "bottom", "xmin", "xmax"} <= mesh.markers
    assert 2 * mesh.n_nodes >= 50_000
    depth = -mesh.nodes[mesh.marker_nodes("pile"), 2]
    assert depth.max() == pytest.approx(60.0)


def test_ates_mesh_has_wellbore_interval():
    mesh = build_mesh(build_ates_benchmark("coarse"))
    z = mesh.nodes[:, 2]
    assert np.any(np.isclose(z, -100.0)) and np.any(np.isclose(z, -200.0))


def test_unknown_top_level_field_rejected():
    d = build_ates_benchmark().to_dict()
    d["bogus"] = 1
    with pytest.raises(ConfigurationError, match="bogus"):
        ScenarioConfig.from_dict(d)
