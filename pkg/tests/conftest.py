import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hydrotherm.physics import FluidConstants, Material
from hydrotherm.scenarios import (
    BoundaryCondition,
    Geometry,
    Layer,
    ScenarioConfig,
    Schedule,
    SolverSettings,
    TimeControls,
)

# JIT compilation makes first calls slow; deadlines would be meaningless
settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

RHO_G = 1000.0 * 9.81


def hydrostatic(value=0.0):
    return Schedule("linear_gradient_profile", value=value, depth_gradient=RHO_G)


def box_config(extent=(1.0, 1.0, 1.0), resolution=(2, 2, 2), layers=None, bcs=(), init_T=None, init_P=None,
               h=1000.0, t_end=None, output_every=1, supg=False, workers=1, name="box",
               tol=1e-8):
    layers = layers or (Layer(extent[2], Material("rock", K=1e-7, lambda_direct=1.2, cT_direct=1.2e6)),)
    return ScenarioConfig(
        name=name,
        geometry=Geometry(kind="box", extent=extent, resolution=resolution),
        layers=tuple(layers),
        fluid=FluidConstants(),
        boundary_conditions=tuple(bcs),
        initial_temperature=init_T or Schedule("constant", 280.0),
        initial_pressure=init_P or hydrostatic(),
        time=TimeControls(h=h, t_end=h if t_end is None else t_end, output_every=output_every),
        solver=SolverSettings(tol=tol, supg=supg),
        workers=workers,
    ).validate()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dirichlet(field, marker, value):
    return BoundaryCondition(field, marker, "dirichlet", Schedule("constant", value))


class Recorder:
    """Sink that keeps every snapshot state."""

    def __init__(self):
        self.started = None
        self.states = []
        self.finished = None

    def start(self, state, model):
        self.started = state

    def snapshot(self, state, model):
        self.states.append(state)

    def finish(self, state, model, perf):
        self.finished = (state, perf)


@pytest.fixture(scope="session")
def ates_run():
    """The 180-day coarse ATES run, shared by the sim tests and the acceptance suite."""
    import time

    from hydrotherm.scenarios import build_ates_benchmark
    from hydrotherm.sim import Model, run

    cfg = build_ates_benchmark("coarse")
    model = Model(cfg)
    rec = Recorder()
    t0 = time.perf_counter()
    state, perf = run(cfg, sinks=[rec], model=model)
    return {"config": cfg, "model": model, "state": state, "perf": perf, "recorder": rec,
            "elapsed": time.perf_counter() - t0}


# acceptance lines are collected here and echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
