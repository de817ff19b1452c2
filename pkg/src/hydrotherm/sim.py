"""Time integration of the one-way coupled flow and heat problem.

Each step solves pressure first, derives the Darcy flux from the new
pressure, then solves temperature with that flux. Temperature never feeds
back into the flow problem.
"""

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, SolverError
from .fem import apply_dirichlet, assemble_pressure, assemble_temperature, cell_coefficients, darcy_flux_at_cells
from .linalg import bicgstab, cg
from .parallel import workers as worker_pool
from .scenarios import ScenarioConfig, Schedule, TimeControls, build_mesh, evaluate_schedule

log = logging.getLogger(__name__)

PHASES = ("assemble_P", "solve_P", "assemble_T", "solve_T")


@dataclass(frozen=True, eq=False)
class State:
    time: float
    step: int
    P: np.ndarray
    T: np.ndarray
    q: np.ndarray


@dataclass
class PerfReport:
    """Wall-clock seconds per solver phase for one run."""

    assemble_P: float = 0.0
    solve_P: float = 0.0
    assemble_T: float = 0.0
    solve_T: float = 0.0
    total: float = 0.0
    dofs: int = 0
    workers: int = 1
    steps: int = 0
    iterations: dict = field(default_factory=lambda: {"P": 0, "T": 0})

    @property
    def phases(self):
        return {name: getattr(self, name) for name in PHASES}

    def to_dict(self):
        return {
            "phases": self.phases,
            "total": self.total,
            "dofs": self.dofs,
            "workers": self.workers,
            "steps": self.steps,
            "solver_iterations": dict(self.iterations),
        }


class Model:
    """A scenario bound to its mesh, with boundary node sets resolved once."""

    def __init__(self, config, mesh=None):
        self.config = config.validate()
        self.mesh = build_mesh(config) if mesh is None else mesh
        self.materials = config.materials
        self.fluid = config.fluid
        self.coefficients = cell_coefficients(self.mesh, self.materials, self.fluid)
        self._dirichlet = {"pressure": [], "temperature": []}
        self._flux = {"pressure": [], "temperature": []}
        for bc in config.boundary_conditions:
            if bc.kind == "dirichlet":
                nodes = self.mesh.marker_nodes(bc.marker)
                if bc.depth_range is not None:
                    depth = -self.mesh.nodes[nodes, 2]
                    lo, hi = bc.depth_range
                    tol = 1e-9 * max(1.0, abs(hi))
                    nodes = nodes[(depth >= lo - tol) & (depth <= hi + tol)]
                self._dirichlet[bc.field].append((bc, nodes))
            else:
                self._flux[bc.field].append(bc)

    @property
    def n_nodes(self):
        return self.mesh.n_nodes

    @property
    def dofs(self):
        # one pressure and one temperature unknown per node
        return 2 * self.mesh.n_nodes

    def dirichlet(self, name, t):
        """``(dofs, values)`` of the field's Dirichlet data at time ``t``; later conditions win."""
        entries = self._dirichlet[name]
        if not entries:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        dofs = np.concatenate([nodes for _, nodes in entries])
        vals = np.concatenate(
            [evaluate_schedule(bc.schedule, t, self.mesh.nodes[nodes]) for bc, nodes in entries]
        )
        # keep the last occurrence of every dof
        rev_unique, rev_idx = np.unique(dofs[::-1], return_index=True)
        keep = len(dofs) - 1 - rev_idx
        return rev_unique, vals[keep]

    def fluxes(self, name, t):
        return [(bc.marker, float(evaluate_schedule(bc.schedule, t)), bc.depth_range) for bc in self._flux[name]]


def initialize(model):
    """Initial state from the configured profiles; the flux follows from P."""
    cfg = model.config
    nodes = model.mesh.nodes
    T = np.asarray(evaluate_schedule(cfg.initial_temperature, 0.0, nodes), dtype=float).copy()
    P = np.asarray(evaluate_schedule(cfg.initial_pressure, 0.0, nodes), dtype=float).copy()
    for name, arr in (("pressure", P), ("temperature", T)):
        for bc, bc_nodes in model._dirichlet[name]:
            if bc.initial_value is not None:
                arr[bc_nodes] = bc.initial_value
    q = darcy_flux_at_cells(model.mesh, model.materials, model.fluid, P, cfg.solver.quadrature_order)
    return State(0.0, 0, P, T, q)


def _solve(solver, system, x0, settings, label, step):
    n = system.matrix.shape[0]
    # warm start from the previous state with the new boundary values in place
    x0 = x0.copy()
    x0[system.dirichlet_dofs] = system.dirichlet_values
    x, report = solver(system.matrix, system.rhs, tol=settings.tol, maxit=settings.maxit_factor * n, x0=x0)
    if not report.converged:
        raise SolverError(
            f"step {step}: {label} solve did not converge "
            f"({report.iterations} iterations, relative residual {report.residual:.3e})",
            report=report,
            step=step,
        )
    return x, report


def step(state, model, h=None, perf=None):
    """Advance ``state`` by one backward-Euler step; ``state`` is left untouched."""
    cfg = model.config
    h = cfg.time.h if h is None else h
    settings = cfg.solver
    t_new = state.time + h
    n = state.step + 1
    clock = time.perf_counter

    t0 = clock()
    p_sys = assemble_pressure(model.mesh, model.materials, model.fluid, state.P, h,
                              fluxes=model.fluxes("pressure", t_new),
                              dirichlet=model.dirichlet("pressure", t_new),
                              order=settings.quadrature_order, coefficients=model.coefficients)
    p_sys = apply_dirichlet(p_sys, symmetrize=True)
    t1 = clock()
    P, p_rep = _solve(cg, p_sys, state.P, settings, "pressure", n)
    t2 = clock()
    t_sys, q = assemble_temperature(model.mesh, model.materials, model.fluid, state.T, P, h,
                                    heat_fluxes=model.fluxes("temperature", t_new),
                                    dirichlet=model.dirichlet("temperature", t_new),
                                    supg=settings.supg, order=settings.quadrature_order,
                                    coefficients=model.coefficients)
    t_sys = apply_dirichlet(t_sys, symmetrize=False)
    t3 = clock()
    T, t_rep = _solve(bicgstab, t_sys, state.T, settings, "temperature", n)
    t4 = clock()
    if perf is not None:
        perf.assemble_P += t1 - t0
        perf.solve_P += t2 - t1
        perf.assemble_T += t3 - t2
        perf.solve_T += t4 - t3
        perf.iterations["P"] += p_rep.iterations
        perf.iterations["T"] += t_rep.iterations
    return State(t_new, n, P, T, q)


def _call(sink, hook, *args):
    fn = getattr(sink, hook, None)
    if fn is not None:
        fn(*args)
    elif hook == "snapshot" and callable(sink):
        sink(*args)


def run(scenario, controls=None, sinks=(), workers=None, model=None):
    """Run ``scenario`` to ``t_end``.

    ``sinks`` are callables ``sink(state, model)`` invoked every
    ``output_every`` steps, or objects with optional ``start``, ``snapshot``
    and ``finish`` methods. Returns the final state and a :class:`PerfReport`.
    """
    if not isinstance(scenario, ScenarioConfig):
        raise ConfigurationError("run() expects a ScenarioConfig")
    if workers is not None:
        scenario = scenario.with_workers(workers)
    if controls is not None:
        scenario = replace(scenario, time=controls)
    controls = scenario.time
    perf = PerfReport(workers=scenario.workers)
    t_start = time.perf_counter()
    with worker_pool(scenario.workers):
        model = model or Model(scenario)
        perf.dofs = model.dofs
        state = initialize(model)
        for sink in sinks:
            _call(sink, "start", state, model)
        try:
            for _ in range(controls.n_steps):
                state = step(state, model, controls.h, perf)
                perf.steps += 1
                if state.step % controls.output_every == 0:
                    for sink in sinks:
                        _call(sink, "snapshot", state, model)
                log.debug("step %d t=%.0f s", state.step, state.time)
        except SolverError as exc:
            exc.perf = perf
            raise
        finally:
            perf.total = time.perf_counter() - t_start
    for sink in sinks:
        _call(sink, "finish", state, model, perf)
    return state, perf


__all__ = [
    "Model",
    "PHASES",
    "PerfReport",
    "Schedule",
    "State",
    "TimeControls",
    "evaluate_schedule",
    "initialize",
    "run",
    "step",
]
