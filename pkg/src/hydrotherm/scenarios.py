"""Scenario configuration, JSON persistence and the two study builders.

All lengths are in metres, times in seconds, temperatures in kelvin and
pressures in pascal (gauge, zero at the water table).
"""

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .mesh import (
    ObservationLine,
    generate_layered_box,
    generate_wedge,
    graded_axis,
    mark_pile_regions,
    partition,
    wedge_point,
)
from .physics import FluidConstants, Material

DAY = 86400.0
YEAR = 365.0 * DAY
MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")

SCHEDULE_KINDS = ("constant", "square_wave", "monthly_table", "linear_gradient_profile")


@dataclass(frozen=True)
class Schedule:
    """Time (or, for ``linear_gradient_profile``, space) dependent boundary value.

    constant: ``value``.
    square_wave: ``mean +/- amplitude`` over ``period``, hot half first unless
    ``hot_first`` is false.
    monthly_table: twelve ``values`` (January first); month ``start_month``
    (1-12) starts at t = 0 and each month lasts ``period / 12``.
    linear_gradient_profile: ``value + depth_gradient * depth +
    lateral_gradient . (xy - origin)``.
    """

    kind: str = "constant"
    value: float = 0.0
    mean: Optional[float] = None
    amplitude: Optional[float] = None
    period: float = YEAR
    hot_first: bool = True
    values: Optional[tuple] = None
    start_month: int = 1
    depth_gradient: float = 0.0
    lateral_gradient: tuple = (0.0, 0.0)
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigurationError(f"schedule kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}")
        if self.kind == "square_wave":
            if self.mean is None or self.amplitude is None:
                raise ConfigurationError("square_wave schedule needs mean and amplitude")
            if self.period <= 0:
                raise ConfigurationError(f"square_wave period must be positive, got {self.period}")
        if self.kind == "monthly_table":
            if self.values is None or len(self.values) != 12:
                raise ConfigurationError("monthly_table schedule needs exactly 12 values")
            if not 1 <= self.start_month <= 12:
                raise ConfigurationError(f"start_month must be 1..12, got {self.start_month}")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "lateral_gradient", tuple(self.lateral_gradient))
        object.__setattr__(self, "origin", tuple(self.origin))

    @property
    def is_spatial(self):
        return self.kind == "linear_gradient_profile"

    def to_dict(self):
        keep = {
            "constant": ("value",),
            "square_wave": ("mean", "amplitude", "period", "hot_first"),
            "monthly_table": ("values", "start_month", "period"),
            "linear_gradient_profile": ("value", "depth_gradient", "lateral_gradient", "origin"),
        }[self.kind]
        out = {"kind": self.kind}
        for k in keep:
            v = getattr(self, k)
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for k in ("values", "lateral_gradient", "origin"):
            if k in data and data[k] is not None:
                data[k] = tuple(data[k])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"schedule: {exc}") from None


def evaluate_schedule(s, t, points=None):
    """Value of schedule ``s`` at time ``t``; profiles need ``points`` (n, 3)."""
    if t < 0:
        raise ConfigurationError(f"schedule time must be non-negative, got {t}")
    if s.kind == "constant":
        return s.value if points is None else np.full(len(points), float(s.value))
    if s.kind == "square_wave":
        hot = math.fmod(t, s.period) < 0.5 * s.period
        sign = 1.0 if hot == s.hot_first else -1.0
        v = s.mean + sign * s.amplitude
        return v if points is None else np.full(len(points), v)
    if s.kind == "monthly_table":
        month = (s.start_month - 1 + int(math.floor(t / (s.period / 12.0) + 1e-12))) % 12
        v = s.values[month]
        return v if points is None else np.full(len(points), v)
    if points is None:
        raise ConfigurationError("linear_gradient_profile is spatial; pass node coordinates")
    pts = np.asarray(points, dtype=float)
    gx, gy = s.lateral_gradient
    ox, oy = s.origin
    return s.value + s.depth_gradient * (-pts[:, 2]) + gx * (pts[:, 0] - ox) + gy * (pts[:, 1] - oy)


def placeholder_monthly_surface(mean=287.45, amplitude=3.5, anchor_month=5, anchor_value=287.65):
    """Sinusoidal monthly table with the given annual mean and an exact anchor month value.

    The phase is chosen so the temperature rises through ``anchor_value`` in
    ``anchor_month`` toward a late-summer maximum.
    """
    theta = math.acos((anchor_value - mean) / amplitude)
    peak = anchor_month + 12.0 * theta / (2.0 * math.pi)
    vals = [mean + amplitude * math.cos(2.0 * math.pi * (m - peak) / 12.0) for m in range(1, 13)]
    vals[anchor_month - 1] = anchor_value
    return tuple(vals)


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet value or inward flux on a marker.

    Fluxes are m/s of water for ``pressure`` and W/m^2 of heat for
    ``temperature``. Where Dirichlet conditions overlap, the later entry wins.
    ``initial_value`` overrides the initial field on the constrained nodes.
    """

    field: str
    marker: str
    kind: str
    schedule: Schedule
    depth_range: Optional[tuple] = None
    initial_value: Optional[float] = None

    def __post_init__(self):
        if self.field not in ("pressure", "temperature"):
            raise ConfigurationError(f"boundary field must be pressure or temperature, got {self.field!r}")
        if self.kind not in ("dirichlet", "flux"):
            raise ConfigurationError(f"boundary kind must be dirichlet or flux, got {self.kind!r}")
        if self.kind == "flux" and self.schedule.is_spatial:
            raise ConfigurationError(f"flux on {self.marker!r} cannot use a spatial profile")
        if self.depth_range is not None:
            object.__setattr__(self, "depth_range", tuple(float(d) for d in self.depth_range))

    def to_dict(self):
        out = {"field": self.field, "marker": self.marker, "kind": self.kind, "schedule": self.schedule.to_dict()}
        if self.depth_range is not None:
            out["depth_range"] = list(self.depth_range)
        if self.initial_value is not None:
            out["initial_value"] = self.initial_value
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["schedule"] = Schedule.from_dict(data["schedule"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"boundary condition: {exc}") from None


@dataclass(frozen=True)
class Layer:
    thickness: float
    material: Material

    def to_dict(self):
        return {"thickness": self.thickness, "material": self.material.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data["thickness"]), Material.from_dict(data["material"]))


@dataclass(frozen=True)
class Pile:
    center: tuple
    radius: float = 0.75
    length: float = 60.0

    def to_dict(self):
        return {"center": list(self.center), "radius": self.radius, "length": self.length}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["center"]), float(data.get("radius", 0.75)), float(data.get("length", 60.0)))


@dataclass(frozen=True)
class Geometry:
    """Box (``extent``, ``resolution``) or wedge (``radius``, ``depth``, ...).

    Box meshes are refined to ``pile_spacing`` around pile centres and pile
    edges, growing by ``growth`` per cell away from them. ``island_margin``
    splits the top surface into ``island_top`` and ``sea_top`` regions.
    """

    kind: str = "box"
    extent: tuple = (1.0, 1.0, 1.0)
    resolution: tuple = (1, 1, 1)
    pile_spacing: float = 1.0
    growth: float = 1.5
    island_margin: float = 0.0
    radius: float = 20.0
    inner_radius: float = 0.1
    depth: float = 300.0
    wedge_angle: float = 2.0
    n_r: int = 40
    n_z: int = 60
    grading: float = 1.1

    def __post_init__(self):
        if self.kind not in ("box", "wedge"):
            raise ConfigurationError(f"geometry kind must be box or wedge, got {self.kind!r}")
        object.__setattr__(self, "extent", tuple(float(v) for v in self.extent))
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))

    @property
    def domain_depth(self):
        return self.extent[2] if self.kind == "box" else self.depth

    @property
    def markers(self):
        if self.kind == "wedge":
            return {"top", "bottom", "side", "outer", "wellbore"}
        out = {"top", "bottom", "xmin", "xmax", "ymin", "ymax"}
        if self.island_margin > 0:
            out |= {"island_top", "sea_top"}
        return out

    def to_dict(self):
        if self.kind == "wedge":
            keys = ("kind", "radius", "inner_radius", "depth", "wedge_angle", "n_r", "n_z", "grading")
        else:
            keys = ("kind", "extent", "resolution", "pile_spacing", "growth", "island_margin")
        return {k: (list(getattr(self, k)) if isinstance(getattr(self, k), tuple) else getattr(self, k))
                for k in keys}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"geometry: {exc}") from None


@dataclass(frozen=True)
class TimeControls:
    h: float = DAY
    t_end: float = 180 * DAY
    output_every: int = 1

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigurationError(f"time step h must be positive, got {self.h}")
        if self.t_end < self.h:
            raise ConfigurationError(f"t_end={self.t_end} is shorter than one step h={self.h}")
        if self.output_every < 1:
            raise ConfigurationError(f"output_every must be >= 1, got {self.output_every}")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.h))


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-8
    maxit_factor: int = 10
    supg: bool = False
    quadrature_order: int = 2

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ConfigurationError(f"solver tol must lie in (0, 1), got {self.tol}")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    geometry: Geometry
    layers: tuple
    fluid: FluidConstants = field(default_factory=FluidConstants)
    boundary_conditions: tuple = ()
    initial_temperature: Schedule = field(default_factory=lambda: Schedule("constant", 288.15))
    initial_pressure: Schedule = field(default_factory=lambda: Schedule("constant", 0.0))
    piles: tuple = ()
    observation_lines: tuple = ()
    time: TimeControls = field(default_factory=TimeControls)
    solver: SolverSettings = field(default_factory=SolverSettings)
    workers: int = 1

    @property
    def materials(self):
        return [layer.material for layer in self.layers]

    @property
    def interfaces(self):
        return list(np.cumsum([layer.thickness for layer in self.layers])[:-1])

    def with_workers(self, workers):
        return replace(self, workers=int(workers))

    def validate(self):
        depth = self.geometry.domain_depth
        if not self.layers:
            raise ConfigurationError("layers: at least one layer is required")
        total = sum(layer.thickness for layer in self.layers)
        if abs(total - depth) > 1e-9 * depth:
            raise ConfigurationError(f"layers: thicknesses sum to {total} m but the domain is {depth} m deep")
        if any(layer.thickness <= 0 for layer in self.layers):
            raise ConfigurationError("layers: every thickness must be positive")
        known = set(self.geometry.markers)
        if self.piles:
            known |= {"pile"} | {f"pile_{i}" for i in range(len(self.piles))}
        for i, bc in enumerate(self.boundary_conditions):
            if bc.marker not in known:
                raise ConfigurationError(
                    f"boundary_conditions[{i}]: marker {bc.marker!r} does not exist (known: {sorted(known)})"
                )
            if bc.kind == "flux" and bc.marker in {"pile", "island_top", "sea_top"} | {
                f"pile_{j}" for j in range(len(self.piles))
            }:
                raise ConfigurationError(f"boundary_conditions[{i}]: flux needs a face marker, not {bc.marker!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        return self

    # ---- serialization

    def to_dict(self):
        return {
            "name": self.name,
            "geometry": self.geometry.to_dict(),
            "layers": [layer.to_dict() for layer in self.layers],
            "fluid": self.fluid.to_dict(),
            "boundary_conditions": [bc.to_dict() for bc in self.boundary_conditions],
            "initial_temperature": self.initial_temperature.to_dict(),
            "initial_pressure": self.initial_pressure.to_dict(),
            "piles": [p.to_dict() for p in self.piles],
            "observation_lines": [line.to_dict() for line in self.observation_lines],
            "time": asdict(self.time),
            "solver": asdict(self.solver),
            "workers": self.workers,
        }

    def to_json(self, path=None, indent=2):
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"unknown config field(s) {sorted(unknown)}")
        try:
            return cls(
                name=data["name"],
                geometry=Geometry.from_dict(data["geometry"]),
                layers=tuple(Layer.from_dict(d) for d in data["layers"]),
                fluid=FluidConstants(**data.get("fluid", {})),
                boundary_conditions=tuple(BoundaryCondition.from_dict(d) for d in data.get("boundary_conditions", [])),
                initial_temperature=Schedule.from_dict(data["initial_temperature"]),
                initial_pressure=Schedule.from_dict(data["initial_pressure"]),
                piles=tuple(Pile.from_dict(d) for d in data.get("piles", [])),
                observation_lines=tuple(
                    ObservationLine(d["name"], tuple(d["start"]), tuple(d["end"]), int(d.get("sample_count", 50)))
                    for d in data.get("observation_lines", [])
                ),
                time=TimeControls(**data.get("time", {})),
                solver=SolverSettings(**data.get("solver", {})),
                workers=int(data.get("workers", 1)),
            ).validate()
        except KeyError as exc:
            raise ConfigurationError(f"missing config field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigurationError(f"config: {exc}") from None

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)


def layer_stack_depths(config):
    """``(material name, top depth, bottom depth)`` for each layer, top first."""
    depth = config.geometry.domain_depth
    total = sum(layer.thickness for layer in config.layers)
    if abs(total - depth) > 1e-9 * depth:
        raise ConfigurationError(f"layers sum to {total} m, domain depth is {depth} m")
    out, top = [], 0.0
    for layer in config.layers:
        out.append((layer.material.name, top, top + layer.thickness))
        top += layer.thickness
    return out


# --------------------------------------------------------------------------
# mesh construction


def build_mesh(config):
    """Mesh for ``config``: layers, pile regions, surface regions and partition."""
    config.validate()
    g = config.geometry
    interfaces = config.interfaces
    if g.kind == "wedge":
        mesh = generate_wedge(g.radius, g.depth, g.wedge_angle, interfaces, g.grading, g.n_r, g.n_z, g.inner_radius)
    else:
        Lx, Ly, Lz = g.extent
        nx, ny, nz = g.resolution
        fx, fy = [], []
        for p in config.piles:
            for coord, feats in ((p.center[0], fx), (p.center[1], fy)):
                feats.extend([(coord, g.pile_spacing), (coord - p.radius, g.pile_spacing),
                              (coord + p.radius, g.pile_spacing)])
        if g.island_margin > 0:
            h_x, h_y = Lx / nx, Ly / ny
            fx.extend([(g.island_margin, h_x), (Lx - g.island_margin, h_x)])
            fy.extend([(g.island_margin, h_y), (Ly - g.island_margin, h_y)])
        xc = graded_axis(Lx, Lx / nx, fx, g.growth)
        yc = graded_axis(Ly, Ly / ny, fy, g.growth)
        extra = sorted({p.length for p in config.piles})
        mesh = generate_layered_box((Lx, Ly, Lz), interfaces, (nx, ny, nz), xc, yc, extra_depths=extra)
    if config.piles:
        mesh, _ = mark_pile_regions(mesh, [(p.center, p.radius, p.length) for p in config.piles])
    if g.kind == "box" and g.island_margin > 0:
        top = mesh.marker_nodes("top")
        x, y = mesh.nodes[top, 0], mesh.nodes[top, 1]
        m = g.island_margin
        tol = 1e-9 * max(g.extent)
        island = (x >= m - tol) & (x <= g.extent[0] - m + tol) & (y >= m - tol) & (y <= g.extent[1] - m + tol)
        regions = dict(mesh.node_regions)
        regions["island_top"] = top[island]
        regions["sea_top"] = top[~island]
        mesh = replace(mesh, node_regions=regions)
    if config.workers > 1:
        mesh = partition(mesh, config.workers)
    return mesh


# --------------------------------------------------------------------------
# builders

ATES_PRESETS = {
    "coarse": {"n_r": 30, "n_z": 90, "grading": 1.12},
    "fine": {"n_r": 80, "n_z": 300, "grading": 1.05},
}


def build_ates_benchmark(resolution="coarse", injection=True, isothermal=False, hydrostatic=False):
    """Hot-water injection into a confined aquifer, on an axisymmetric wedge.

    ``injection=False`` drops the wellbore flux and temperature;
    ``isothermal`` removes the geothermal gradient; ``hydrostatic`` starts
    from a hydrostatic instead of a uniform pressure.
    """
    if resolution not in ATES_PRESETS:
        raise ConfigurationError(f"ATES resolution must be one of {sorted(ATES_PRESETS)}, got {resolution!r}")
    preset = ATES_PRESETS[resolution]
    fluid = FluidConstants(c_w=1.0e6)
    lam, cT, B = 1.2, 1.2e6, 1.0e5
    caprock = Material("caprock", K=1e-10, B_poro=B, lambda_direct=lam, cT_direct=cT)
    aquifer = Material("aquifer", K=1e-6, B_poro=B, lambda_direct=lam, cT_direct=cT)
    basement = Material("basement", K=1e-10, B_poro=B, lambda_direct=lam, cT_direct=cT)
    layers = (Layer(100.0, caprock), Layer(100.0, aquifer), Layer(100.0, basement))
    geometry = Geometry(kind="wedge", radius=20.0, inner_radius=0.1, depth=300.0, wedge_angle=2.0, **preset)

    t_top, gradient, p0 = 278.15, (0.0 if isothermal else 0.05), 0.1e6
    init_T = Schedule("linear_gradient_profile", value=t_top, depth_gradient=gradient)
    if hydrostatic:
        init_P = Schedule("linear_gradient_profile", value=p0, depth_gradient=fluid.rho_w * fluid.g)
    else:
        init_P = Schedule("constant", value=p0)
    aquifer_interval = (100.0, 200.0)
    bcs = [
        BoundaryCondition("pressure", "outer", "dirichlet", init_P),
        BoundaryCondition("temperature", "top", "dirichlet", Schedule("constant", t_top)),
    ]
    if gradient > 0:
        # conductive flux that sustains the initial gradient
        bcs.append(BoundaryCondition("temperature", "bottom", "flux", Schedule("constant", lam * gradient)))
    if injection:
        bcs += [
            BoundaryCondition("pressure", "wellbore", "flux", Schedule("constant", 1.0e-3), aquifer_interval),
            BoundaryCondition("temperature", "wellbore", "dirichlet", Schedule("constant", 288.15), aquifer_interval),
        ]
    angle = geometry.wedge_angle
    lines = (
        ObservationLine("radial_aquifer_mid", wedge_point(0.1, -150.0, angle), wedge_point(20.0, -150.0, angle), 100),
        ObservationLine("vertical_r1", wedge_point(1.0, 0.0, angle), wedge_point(1.0, -300.0, angle), 301),
        ObservationLine("vertical_r5", wedge_point(5.0, 0.0, angle), wedge_point(5.0, -300.0, angle), 301),
    )
    return ScenarioConfig(
        name=f"ates-{resolution}",
        geometry=geometry,
        layers=layers,
        fluid=fluid,
        boundary_conditions=tuple(bcs),
        initial_temperature=init_T,
        initial_pressure=init_P,
        observation_lines=lines,
        time=TimeControls(h=DAY, t_end=180 * DAY, output_every=30),
    ).validate()


def treasure_island_layers():
    """Five-layer profile with effective properties; thicknesses in metres."""
    rows = [
        ("Fill", 10.0, 1.1e-5, 2.5e6, 2.2),
        ("Shoal", 5.0, 3.5e-5, 2.5e6, 2.2),
        ("Young Bay mud", 25.0, 1.7e-9, 3.5e6, 1.5),
        ("Old Bay mud", 35.0, 1.7e-9, 3.5e6, 1.7),
        ("Franciscan bedrock", 25.0, 1.0e-6, 2.0e6, 2.97),
    ]
    return tuple(
        Layer(t, Material(name, K=K, cT_direct=cT, lambda_direct=lam, B_poro=1.0e5)) for name, t, K, cT, lam in rows
    )


def _full_scale_piles(island_x, island_y, margin, count=1130, spacing=20.0):
    """Pile grid clipped to rectangular building blocks, truncated row by row to ``count``."""
    blocks = []
    bw, bh = 220.0, 180.0
    for i in range(4):
        for j in range(3):
            x0 = margin + 120.0 + i * 380.0
            y0 = margin + 100.0 + j * 300.0
            blocks.append((x0, x0 + bw, y0, y0 + bh))
    centers = []
    for x0, x1, y0, y1 in blocks:
        for y in np.arange(y0, y1 + 1e-9, spacing):
            for x in np.arange(x0, x1 + 1e-9, spacing):
                if margin < x < margin + island_x and margin < y < margin + island_y:
                    centers.append((float(x), float(y)))
    centers.sort(key=lambda c: (c[1], c[0]))
    if len(centers) < count:
        raise ConfigurationError(f"building blocks hold only {len(centers)} piles, need {count}")
    return centers[:count]


def build_pile_field(scale="desk", resolution=None):
    """Energy-pile field in layered fill, mud and bedrock.

    ``scale`` is ``desk`` (3 x 3 piles in a 200 x 200 x 100 m block) or
    ``full`` (1130 piles under a 1680 x 1040 m island plus sea margin).
    ``resolution`` overrides the base cell counts ``(nx, ny, nz)``.
    """
    fluid = FluidConstants()
    layers = treasure_island_layers()
    margin, spacing, radius, length = 45.7, 20.0, 0.75, 60.0
    if scale == "desk":
        Lx, Ly, Lz = 200.0, 200.0, 100.0
        centers = [(80.0 + spacing * i, 80.0 + spacing * j) for j in range(3) for i in range(3)]
        res = resolution or (20, 20, 25)
        geometry = Geometry(kind="box", extent=(Lx, Ly, Lz), resolution=res, pile_spacing=0.75, growth=1.3,
                            island_margin=margin)
    elif scale == "full":
        island_x, island_y = 1680.0, 1040.0
        Lx, Ly, Lz = island_x + 2 * margin, island_y + 2 * margin, 100.0
        centers = _full_scale_piles(island_x, island_y, margin)
        res = resolution or (180, 110, 25)
        geometry = Geometry(kind="box", extent=(Lx, Ly, Lz), resolution=res, pile_spacing=0.75, growth=1.8,
                            island_margin=margin)
    else:
        raise ConfigurationError(f"pile field scale must be desk or full, got {scale!r}")
    piles = tuple(Pile(c, radius, length) for c in centers)

    t_surface, gradient = 287.65, 0.03
    if scale == "full":
        lateral = 8500.0 / Lx  # 8.5 kPa across the span
    else:
        lateral = 5.0  # Pa/m
    init_T = Schedule("linear_gradient_profile", value=t_surface, depth_gradient=gradient)
    hydro = Schedule("linear_gradient_profile", value=0.0, depth_gradient=fluid.rho_w * fluid.g,
                     lateral_gradient=(lateral, 0.0), origin=(0.0, 0.0))
    pile_wave = Schedule("square_wave", mean=288.55, amplitude=13.0, period=YEAR, hot_first=True)
    surface = Schedule("monthly_table", values=placeholder_monthly_surface(), start_month=5, period=YEAR)
    bcs = (
        BoundaryCondition("pressure", "xmin", "dirichlet", hydro),
        BoundaryCondition("pressure", "xmax", "dirichlet", hydro),
        BoundaryCondition("temperature", "bottom", "flux", Schedule("constant", 0.89)),
        BoundaryCondition("temperature", "sea_top", "dirichlet", Schedule("constant", 287.45)),
        BoundaryCondition("temperature", "island_top", "dirichlet", surface),
        BoundaryCondition("temperature", "pile", "dirichlet", pile_wave, initial_value=288.55),
    )
    # reference pile: westernmost pile of the middle row
    mid_y = sorted({c[1] for c in centers})[len({c[1] for c in centers}) // 2]
    row = sorted(c for c in centers if c[1] == mid_y)
    ref, nxt = row[0], row[1]
    lines = [
        ObservationLine(f"O-{i + 1}", (ref[0] - d, ref[1], 0.0), (ref[0] - d, ref[1], -Lz), 101)
        for i, d in enumerate((1.0, 5.0, 10.0))
    ]
    lines += [
        ObservationLine(f"O-{i + 4}", (ref[0], ref[1], -d), (nxt[0], nxt[1], -d), 81)
        for i, d in enumerate((6.0, 40.0, 60.0))
    ]
    return ScenarioConfig(
        name=f"pile-{scale}",
        geometry=geometry,
        layers=layers,
        fluid=fluid,
        boundary_conditions=bcs,
        initial_temperature=init_T,
        initial_pressure=hydro,
        piles=piles,
        observation_lines=tuple(lines),
        time=TimeControls(h=5 * DAY, t_end=YEAR, output_every=18),
    ).validate()


BUILDERS = {
    "ates": lambda: build_ates_benchmark("coarse"),
    "ates-fine": lambda: build_ates_benchmark("fine"),
    "pile-desk": lambda: build_pile_field("desk"),
    "pile-full": lambda: build_pile_field("full"),
}

