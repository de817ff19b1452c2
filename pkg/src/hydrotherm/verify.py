"""Analytical verification problems.

Every check runs the full engine (mesh, assembly, solvers, time loop) on a
problem with a closed-form answer and compares against that formula.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfc

from .fem import face_integrals
from .mesh import ObservationLine, sample_line
from .physics import FluidConstants, Material, mobility
from .scenarios import (
    BoundaryCondition,
    Geometry,
    Layer,
    ScenarioConfig,
    Schedule,
    SolverSettings,
    TimeControls,
    build_ates_benchmark,
)
from .sim import Model, State, initialize, step

# benchmark rock and water coefficients
LAMBDA = 1.2
C_T = 1.2e6
C_W = 1.0e6


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    limit: str
    passed: bool
    detail: str = ""

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.6g} ({self.limit}) {self.detail}".rstrip()


def _material(name="rock", K=1e-12, lam=LAMBDA, cT=C_T):
    return Material(name, K=K, lambda_direct=lam, cT_direct=cT)


def _column(length, n, layers=None, bcs=(), init_T=None, init_P=None, h=1.0, t_end=1.0, supg=False, fluid=None,
            width=1.0):
    """Single-column box config (one cell across) along z."""
    fluid = fluid or FluidConstants(c_w=C_W)
    layers = layers or (Layer(length, _material()),)
    hydro = Schedule("linear_gradient_profile", value=0.0, depth_gradient=fluid.rho_w * fluid.g)
    return ScenarioConfig(
        name="column",
        geometry=Geometry(kind="box", extent=(width, width, length), resolution=(1, 1, n)),
        layers=tuple(layers),
        fluid=fluid,
        boundary_conditions=tuple(bcs),
        initial_temperature=init_T or Schedule("constant", 0.0),
        initial_pressure=init_P or hydro,
        time=TimeControls(h=h, t_end=t_end, output_every=1),
        solver=SolverSettings(tol=1e-10, supg=supg),
    )


def _advance(model, state, n_steps, h):
    for _ in range(n_steps):
        state = step(state, model, h)
    return state


# --------------------------------------------------------------------------


def equilibrium_fixed_point(n_steps=10):
    """Injection-free, isothermal ATES wedge starting hydrostatic stays put."""
    cfg = build_ates_benchmark("coarse", injection=False, isothermal=True, hydrostatic=True)
    t0 = time.perf_counter()
    model = Model(cfg)
    s0 = initialize(model)
    s = _advance(model, s0, n_steps, cfg.time.h)
    elapsed = time.perf_counter() - t0
    dP = float(np.max(np.abs(s.P - s0.P)))
    dT = float(np.max(np.abs(s.T - s0.T)))
    return {"max_dP": dP, "max_dT": dT, "runtime": elapsed}


def transient_conduction(n_cells=200, length=10.0, n_steps=400, front_cells=20):
    """Step change at the top of a long rod versus the erfc solution.

    Runs until the front width ``4 sqrt(D t)`` spans ``front_cells`` cells.
    Returns the relative L2 error of the temperature change.
    """
    D = LAMBDA / C_T
    dz = length / n_cells
    width = front_cells * dz
    t_end = (width / 4.0) ** 2 / D
    h = t_end / n_steps
    dT = 1.0
    cfg = _column(length, n_cells,
                  bcs=[BoundaryCondition("temperature", "top", "dirichlet", Schedule("constant", dT))],
                  h=h, t_end=t_end)
    model = Model(cfg)
    s = _advance(model, initialize(model), n_steps, h)
    depth = -model.mesh.nodes[:, 2]
    exact = dT * erfc(depth / (2.0 * math.sqrt(D * t_end)))
    err = np.linalg.norm(s.T - exact) / np.linalg.norm(exact)
    return {"l2_rel": float(err), "t": t_end, "front_width": width, "cells_in_front": width / dz}


def layered_darcy_column(p_top=0.0, p_bottom=3.5e6, n_per_layer=10):
    """Steady flow through three layers in series versus the series-resistance flux."""
    fluid = FluidConstants()
    thick = (30.0, 20.0, 50.0)
    Ks = (1e-5, 1e-8, 1e-6)
    layers = tuple(Layer(t, _material(f"L{i}", K=K)) for i, (t, K) in enumerate(zip(thick, Ks)))
    L = sum(thick)
    bcs = [
        BoundaryCondition("pressure", "top", "dirichlet", Schedule("constant", p_top)),
        BoundaryCondition("pressure", "bottom", "dirichlet", Schedule("constant", p_bottom)),
    ]
    h = 1e15  # one step reaches steady state
    cfg = _column(L, n_per_layer * 10, layers=layers, bcs=bcs, h=h, t_end=h, fluid=fluid)
    model = Model(cfg)
    s = _advance(model, initialize(model), 1, h)
    resistance = sum(t / mobility(layer.material, fluid) for t, layer in zip(thick, layers))
    # q_z = -(p(z_top) - p(z_bottom) + rho g L) / sum(L_i / k_i), z up
    q_exact = -(p_top - p_bottom + fluid.rho_w * fluid.g * L) / resistance
    qz = s.q[:, 2]
    rel = float(np.max(np.abs(qz - q_exact)) / abs(q_exact))
    return {"q_exact": q_exact, "q_min": float(qz.min()), "q_max": float(qz.max()), "max_rel_err": rel}


def thermal_retardation(q=1e-5, length=20.0, n_cells=200, n_steps=300, supg=True):
    """Upward flow at fixed Darcy flux carries a warm front from the bottom.

    Returns the simulated and analytic mid-height crossing times.
    """
    fluid = FluidConstants(c_w=C_W)
    K = 1e-4
    mat = _material("sand", K=K)
    k = mobility(mat, fluid)
    # q_z = -k (dp/dz + rho g) = q  ->  p = depth * (q / k + rho g)
    profile = Schedule("linear_gradient_profile", value=0.0, depth_gradient=q / k + fluid.rho_w * fluid.g)
    speed = (C_W / C_T) * q
    t_cross = length / (2.0 * speed)
    t_end = 2.0 * t_cross
    h = t_end / n_steps
    bcs = [
        BoundaryCondition("pressure", "top", "dirichlet", profile),
        BoundaryCondition("pressure", "bottom", "dirichlet", profile),
        BoundaryCondition("temperature", "bottom", "dirichlet", Schedule("constant", 1.0)),
    ]
    cfg = _column(length, n_cells, layers=(Layer(length, mat),), bcs=bcs, init_P=profile, h=h, t_end=t_end,
                  supg=supg, fluid=fluid)
    model = Model(cfg)
    mid = np.flatnonzero(np.isclose(model.mesh.nodes[:, 2], -length / 2.0))
    s = initialize(model)
    prev_t, prev_v = 0.0, 0.0
    crossing = math.nan
    for _ in range(n_steps):
        s = step(s, model, h)
        v = float(s.T[mid].mean())
        if v >= 0.5 > prev_v:
            crossing = prev_t + (0.5 - prev_v) / (v - prev_v) * (s.time - prev_t)
            break
        prev_t, prev_v = s.time, v
    return {"t_cross": crossing, "t_analytic": t_cross, "rel_err": abs(crossing - t_cross) / t_cross,
            "qz": float(np.mean(s.q[:, 2]))}


def _decay_mode_temporal(n_steps, n_cells=200, length=1.0, decay_times=1.0):
    """Rod with zero ends, initial sine mode; error against exp(-D k^2 t)."""
    D = LAMBDA / C_T
    kz = math.pi / length
    t_end = decay_times / (D * kz * kz)
    h = t_end / n_steps
    bcs = [
        BoundaryCondition("temperature", "top", "dirichlet", Schedule("constant", 0.0)),
        BoundaryCondition("temperature", "bottom", "dirichlet", Schedule("constant", 0.0)),
    ]
    cfg = _column(length, n_cells, bcs=bcs, h=h, t_end=t_end)
    model = Model(cfg)
    s0 = initialize(model)
    z = -model.mesh.nodes[:, 2]
    s0 = State(0.0, 0, s0.P, np.sin(kz * z), s0.q)
    s = _advance(model, s0, n_steps, h)
    exact = math.exp(-D * kz * kz * t_end) * np.sin(kz * z)
    return float(np.linalg.norm(s.T - exact) / np.linalg.norm(exact))


def _l2_error_cube(mesh, values, exact_fn, order=3):
    """Quadrature L2 norm of (u_h - u) and of u over the mesh."""
    from .element import cell_geometry, reference

    ref = reference(order)
    nq = len(ref.weights)
    grads = np.empty((nq, 8, 3))
    detj = np.empty(nq)
    err2 = norm2 = 0.0
    xe_all = mesh.nodes[mesh.cells]
    for c in range(mesh.n_cells):
        xe = xe_all[c]
        cell_geometry(xe, ref.dN, grads, detj)
        xq = ref.N @ xe
        uh = ref.N @ values[mesh.cells[c]]
        u = exact_fn(xq)
        w = ref.weights * detj
        err2 += float(w @ (uh - u) ** 2)
        norm2 += float(w @ u ** 2)
    return math.sqrt(err2 / norm2)


def _decay_mode_spatial(n, n_steps=10, decay_times=0.5):
    """Unit cube, zero Dirichlet walls, product-sine mode.

    The reference applies backward Euler exactly to the continuous mode, so
    the remaining error is purely spatial.
    """
    D = LAMBDA / C_T
    k = math.pi
    mu = 3.0 * D * k * k
    t_end = decay_times / mu
    h = t_end / n_steps
    walls = ("top", "bottom", "xmin", "xmax", "ymin", "ymax")
    bcs = [BoundaryCondition("temperature", m, "dirichlet", Schedule("constant", 0.0)) for m in walls]
    cfg = ScenarioConfig(
        name="cube",
        geometry=Geometry(kind="box", extent=(1.0, 1.0, 1.0), resolution=(n, n, n)),
        layers=(Layer(1.0, _material()),),
        fluid=FluidConstants(c_w=C_W),
        boundary_conditions=tuple(bcs),
        initial_pressure=Schedule("linear_gradient_profile", value=0.0, depth_gradient=1000.0 * 9.81),
        time=TimeControls(h=h, t_end=t_end),
        solver=SolverSettings(tol=1e-12),
    )
    model = Model(cfg)
    s0 = initialize(model)
    x = model.mesh.nodes

    def mode(p):
        return np.sin(k * p[:, 0]) * np.sin(k * p[:, 1]) * np.sin(-k * p[:, 2])

    s0 = State(0.0, 0, s0.P, mode(x), s0.q)
    s = _advance(model, s0, n_steps, h)
    amp = (1.0 + h * mu) ** (-n_steps)
    return _l2_error_cube(model.mesh, s.T, lambda p: amp * mode(p))


def convergence_orders():
    """Error ratios under step halving (first order) and mesh halving (second order)."""
    e_t = [_decay_mode_temporal(n) for n in (20, 40, 80)]
    e_x = [_decay_mode_spatial(n) for n in (4, 8, 16)]
    return {
        "temporal_errors": e_t,
        "temporal_ratio": e_t[-2] / e_t[-1],
        "spatial_errors": e_x,
        "spatial_ratio": e_x[-2] / e_x[-1],
    }


def run_all():
    """Run every check; returns a list of :class:`CheckResult`."""
    out = []
    r = equilibrium_fixed_point()
    out.append(CheckResult("equilibrium max|dP| (Pa)", r["max_dP"], "<= 1e-6", r["max_dP"] <= 1e-6))
    out.append(CheckResult("equilibrium max|dT| (K)", r["max_dT"], "<= 1e-8", r["max_dT"] <= 1e-8))
    r = transient_conduction()
    out.append(CheckResult("erfc conduction L2 rel", r["l2_rel"], "<= 0.01", r["l2_rel"] <= 0.01))
    r = layered_darcy_column()
    out.append(CheckResult("series Darcy flux rel", r["max_rel_err"], "<= 1e-3", r["max_rel_err"] <= 1e-3))
    r = thermal_retardation()
    out.append(CheckResult("retarded front crossing rel", r["rel_err"], "<= 0.05", r["rel_err"] <= 0.05))
    r = convergence_orders()
    out.append(CheckResult("temporal ratio", r["temporal_ratio"], "2.0 +/- 0.2",
                           abs(r["temporal_ratio"] - 2.0) <= 0.2))
    out.append(CheckResult("spatial ratio", r["spatial_ratio"], "4.0 +/- 1.0",
                           abs(r["spatial_ratio"] - 4.0) <= 1.0))
    return out


__all__ = [
    "CheckResult",
    "convergence_orders",
    "equilibrium_fixed_point",
    "layered_darcy_column",
    "run_all",
    "thermal_retardation",
    "transient_conduction",
]
