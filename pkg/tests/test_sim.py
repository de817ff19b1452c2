import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import RHO_G, Recorder, box_config, dirichlet, hydrostatic
from hydrotherm.errors import ConfigurationError, SolverError
from hydrotherm.fem import assemble_temperature
from hydrotherm.scenarios import (
    DAY,
    BoundaryCondition,
    Schedule,
    SolverSettings,
    TimeControls,
    build_ates_benchmark,
    build_pile_field,
)
from hydrotherm.sim import PHASES, Model, PerfReport, State, initialize, run, step
from hydrotherm.verify import thermal_retardation


def test_ates_initial_profile():
    model = Model(build_ates_benchmark("coarse"))
    s = initialize(model)
    z = model.mesh.nodes[:, 2]
    bottom = np.isclose(z, -300.0)
    assert np.allclose(s.T[bottom], 293.15)
    assert np.allclose(s.T, 278.15 + 0.05 * -z)
    assert np.all(s.P == 0.1e6)
    assert s.q.shape == (model.mesh.n_cells, 3)


def test_pile_initial_temperature():
    model = Model(build_pile_field("desk"))
    s = initialize(model)
    piles = model.mesh.marker_nodes("pile")
    assert np.all(s.T[piles] == 288.55)


def test_zero_gradient_initial_state_is_uniform():
    model = Model(build_ates_benchmark("coarse", isothermal=True))
    assert np.all(initialize(model).T == 278.15)


def test_hydrostatic_equilibrium_is_fixed_point():
    cfg = box_config(resolution=(3, 3, 4), bcs=[dirichlet("temperature", "top", 280.0)], h=86400.0)
    model = Model(cfg)
    s0 = initialize(model)
    s = s0
    for _ in range(3):
        s = step(s, model)
    assert np.max(np.abs(s.P - s0.P)) <= 1e-10 * np.max(np.abs(s0.P))
    assert np.max(np.abs(s.T - s0.T)) <= 1e-10 * 280.0
    assert np.max(np.abs(s.q)) < 1e-18


def test_step_leaves_input_untouched():
    cfg = box_config(bcs=[dirichlet("temperature", "top", 290.0)])
    model = Model(cfg)
    s0 = initialize(model)
    T0, P0 = s0.T.copy(), s0.P.copy()
    s1 = step(s0, model)
    assert np.array_equal(s0.T, T0) and np.array_equal(s0.P, P0)
    assert (s1.step, s1.time) == (1, cfg.time.h)
    assert not np.array_equal(s1.T, T0)


def test_rod_reaches_linear_profile():
    D = 1e-6
    cfg = box_config(extent=(1.0, 1.0, 1.0), resolution=(1, 1, 10),
                     bcs=[dirichlet("temperature", "top", 1.0), dirichlet("temperature", "bottom", 0.0)],
                     init_T=Schedule("constant", 0.0), h=0.05 / D, t_end=0.05 / D)
    model = Model(cfg)
    s = initialize(model)
    for _ in range(200):
        s = step(s, model)
    z = model.mesh.nodes[:, 2]
    assert np.max(np.abs(s.T - (1.0 + z))) < 1e-6


def test_front_speed_in_uniform_flow():
    r = thermal_retardation(n_cells=100, n_steps=150)
    assert r["rel_err"] < 0.05


def test_one_way_coupling():
    cfg = box_config(resolution=(2, 2, 2), bcs=[dirichlet("pressure", "top", 0.0),
                                                BoundaryCondition("pressure", "xmin", "flux", Schedule("constant", 1e-6))])
    model = Model(cfg)
    s0 = initialize(model)
    warm = State(s0.time, s0.step, s0.P, s0.T + np.linspace(0, 30, len(s0.T)), s0.q)
    a, b = step(s0, model), step(warm, model)
    assert np.array_equal(a.P, b.P) and np.array_equal(a.q, b.q)


def _mass(model, h=1e-300):
    sys_, _ = assemble_temperature(model.mesh, model.materials, model.fluid, np.zeros(model.n_nodes),
                                   initialize(model).P, h)
    return sys_.matrix


@given(st.integers(0, 2**31), st.floats(10.0, 1e7))
def test_insulated_conduction_conserves_mass_weighted_sum(seed, h):
    # solved tightly: the property belongs to the discretization, not the solver tolerance
    cfg = box_config(resolution=(3, 2, 3), h=h, tol=1e-13)
    model = Model(cfg)
    M = _mass(model)
    s0 = initialize(model)
    T0 = np.random.default_rng(seed).uniform(270.0, 300.0, size=model.n_nodes)
    s = State(0.0, 0, s0.P, T0, s0.q)
    total0 = (M @ T0).sum()
    for _ in range(3):
        s = step(s, model, h)
        assert (M @ s.T).sum() == pytest.approx(total0, rel=1e-10)


@given(a=st.floats(250.0, 300.0), span=st.floats(0.1, 50.0), n=st.integers(2, 5), ratio=st.floats(1 / 6, 50.0),
       seed=st.integers(0, 2**31))
def test_maximum_principle_for_pure_conduction(a, span, n, ratio, seed):
    # cubic cells are non-obtuse; consistent-mass Q1 needs h D / dx^2 >= 1/6
    b = a + span
    D = 1.2 / 1.2e6
    h = ratio * (1.0 / n) ** 2 / D
    walls = [dirichlet("temperature", "top", b), dirichlet("temperature", "bottom", a)]
    cfg = box_config(resolution=(n, n, n), bcs=walls, init_T=Schedule("constant", a), h=h)
    model = Model(cfg)
    s0 = initialize(model)
    rng = np.random.default_rng(seed)
    s = State(0.0, 0, s0.P, rng.uniform(a, b, size=model.n_nodes), s0.q)
    eps = 1e-9 * (b - a)
    for _ in range(4):
        s = step(s, model, h)
        assert s.T.min() >= a - eps and s.T.max() <= b + eps


def test_single_step_when_t_end_equals_h():
    cfg = box_config(h=500.0, t_end=500.0)
    state, perf = run(cfg)
    assert perf.steps == 1 and state.step == 1
    assert set(perf.phases) == set(PHASES)
    assert sum(perf.phases.values()) <= perf.total
    assert all(v >= 0 for v in perf.phases.values())


def test_run_invokes_sinks_at_cadence():
    cfg = box_config(h=10.0, t_end=100.0, output_every=3)
    rec = Recorder()
    calls = []
    state, perf = run(cfg, sinks=[rec, lambda s, m: calls.append(s.step)])
    assert [s.step for s in rec.states] == [3, 6, 9]
    assert calls == [3, 6, 9]
    assert rec.started.step == 0 and rec.finished[0] is state


def test_run_is_deterministic():
    cfg = box_config(resolution=(3, 3, 3), bcs=[dirichlet("temperature", "top", 290.0)], h=1e4, t_end=5e4)
    a, _ = run(cfg)
    b, _ = run(cfg)
    assert np.array_equal(a.T, b.T) and np.array_equal(a.P, b.P)


def test_solver_failure_names_step():
    cfg = box_config(bcs=[dirichlet("temperature", "top", 290.0)], h=1e4, t_end=3e4)
    from dataclasses import replace

    cfg = replace(cfg, solver=SolverSettings(tol=1e-30, maxit_factor=1))
    with pytest.raises(SolverError, match="step 1") as err:
        run(cfg)
    assert err.value.step == 1 and err.value.report is not None
    assert isinstance(err.value.perf, PerfReport)


def test_run_rejects_non_config():
    with pytest.raises(ConfigurationError):
        run({"name": "x"})


def test_time_controls_validation():
    with pytest.raises(ConfigurationError):
        TimeControls(h=0.0, t_end=1.0)
    with pytest.raises(ConfigurationError):
        TimeControls(h=2.0, t_end=1.0)


def test_ates_run_emits_snapshots_at_cadence(ates_run):
    rec = ates_run["recorder"]
    assert len(rec.states) == 180 // 30
    assert ates_run["perf"].steps == 180
