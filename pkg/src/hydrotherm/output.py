"""Field, observation and performance output.

A run directory holds ``manifest.json`` (written before the first
snapshot and rewritten as files appear), ``fields_{step:06}.vtk`` snapshots,
``observations.csv``, ``perf.json`` and the report figures.
"""

import csv
import hashlib
import json
import math
import os
import platform
from pathlib import Path

import numpy as np

from .errors import OutputError
from .mesh import sample_line

VTK_HEXAHEDRON = 12
CSV_COLUMNS = ("time_s", "line_name", "arc_length_m", "x", "y", "z", "temperature_K", "pressure_Pa")


def _fmt(v):
    # shortest string that round-trips the double exactly
    return repr(float(v))


def _open(path, mode="w"):
    path = Path(path)
    try:
        return open(path, mode, newline="" if "b" not in mode else None)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_vtk(mesh, state, path):
    """Legacy ASCII unstructured grid with nodal T, P and cell Darcy flux."""
    if len(state.T) != mesh.n_nodes or len(state.P) != mesh.n_nodes:
        raise OutputError(f"{path}: state has {len(state.T)} nodes, mesh has {mesh.n_nodes}")
    if len(state.q) != mesh.n_cells:
        raise OutputError(f"{path}: flux has {len(state.q)} cells, mesh has {mesh.n_cells}")
    n, nc = mesh.n_nodes, mesh.n_cells
    out = [
        "# vtk DataFile Version 3.0",
        f"hydrotherm t={state.time!r} step={state.step}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    out += [" ".join(map(_fmt, p)) for p in mesh.nodes]
    out.append(f"CELLS {nc} {nc * 9}")
    out += ["8 " + " ".join(map(str, c)) for c in mesh.cells]
    out.append(f"CELL_TYPES {nc}")
    out += [str(VTK_HEXAHEDRON)] * nc
    out.append(f"POINT_DATA {n}")
    for name, arr in (("temperature_K", state.T), ("pressure_Pa", state.P)):
        out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        out += [_fmt(v) for v in arr]
    out.append(f"CELL_DATA {nc}")
    out.append("VECTORS darcy_velocity_m_per_s double")
    out += [" ".join(map(_fmt, v)) for v in state.q]
    with _open(path) as fh:
        fh.write("\n".join(out) + "\n")
    return Path(path)


def observation_rows(mesh, state, lines):
    """CSV rows for every line sampled at ``state``; NaN samples become empty fields."""
    rows = []
    both = np.column_stack([state.T, state.P])
    for line in lines:
        arc, pts, vals = sample_line(mesh, both, line)
        for s, p, (t, pr) in zip(arc, pts, vals):
            rows.append([
                repr(float(state.time)), line.name, _fmt(s), _fmt(p[0]), _fmt(p[1]), _fmt(p[2]),
                "" if math.isnan(t) else _fmt(t),
                "" if math.isnan(pr) else _fmt(pr),
            ])
    return rows


def write_observation_csv(rows, path):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)
    return Path(path)


def write_json(data, path):
    with _open(path) as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return Path(path)


def write_perf_report(report, path, extra=None):
    data = report.to_dict()
    if extra:
        data.update(extra)
    return write_json(data, path)


def speedup_table(reports):
    """``{workers: total[1] / total[w]}`` from a mapping of PerfReports."""
    if 1 not in reports:
        raise OutputError("speedup needs a 1-worker run")
    base = reports[1].total
    return {w: (1.0 if w == 1 else base / r.total) for w, r in sorted(reports.items())}


def write_speedup_csv(reports, path):
    speed = speedup_table(reports)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["workers", "total_s", "speedup", "assemble_P_s", "solve_P_s", "assemble_T_s", "solve_T_s",
                    "dofs", "steps"])
        for n, r in sorted(reports.items()):
            ph = r.phases
            w.writerow([n, f"{r.total:.6f}", f"{speed[n]:.6f}"] + [f"{ph[k]:.6f}" for k in ph] + [r.dofs, r.steps])
    return Path(path)


def config_hash(config):
    text = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def _versions():
    import matplotlib
    import numba
    import scipy

    from . import __version__

    return {
        "hydrotherm": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "matplotlib": matplotlib.__version__,
    }


class OutputBundle:
    """Run sink writing snapshots, observations, perf report and manifest.

    Pass it to :func:`hydrotherm.sim.run` as a sink. Observation profiles are
    sampled at t = 0 and at every snapshot.
    """

    def __init__(self, directory, config, vtk=True, figures=True):
        self.dir = Path(directory)
        self.config = config
        self.vtk = vtk
        self.figures = figures
        self.files = []
        self.rows = []
        self.profiles = []  # (time, {line: (arc, T)}) for figures
        self.perf = None
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.dir}: {exc.strerror or exc}") from None

    def _emit(self, path):
        name = os.path.relpath(path, self.dir)
        if name not in self.files:
            self.files.append(name)
        self._write_manifest()

    def _write_manifest(self, status="running"):
        write_json({
            "scenario": self.config.name,
            "config_sha256": config_hash(self.config),
            "workers": self.config.workers,
            "deterministic": True,
            "versions": _versions(),
            "status": status,
            "files": list(self.files),
        }, self.dir / "manifest.json")

    def _observe(self, state, model):
        lines = model.config.observation_lines
        if not lines:
            return
        rows = observation_rows(model.mesh, state, lines)
        self.rows.extend(rows)
        prof = {}
        for r in rows:
            arc, T = float(r[2]), (float(r[6]) if r[6] else math.nan)
            prof.setdefault(r[1], ([], []))
            prof[r[1]][0].append(arc)
            prof[r[1]][1].append(T)
        self.profiles.append((state.time, prof))

    def start(self, state, model):
        self._write_manifest()
        self._emit(write_json(self.config.to_dict(), self.dir / "config.json"))
        self._observe(state, model)

    def snapshot(self, state, model):
        if self.vtk:
            self._emit(write_vtk(model.mesh, state, self.dir / f"fields_{state.step:06d}.vtk"))
        self._observe(state, model)

    def finish(self, state, model, perf):
        self.perf = perf
        if model.config.observation_lines:
            self._emit(write_observation_csv(self.rows, self.dir / "observations.csv"))
        self._emit(write_perf_report(perf, self.dir / "perf.json"))
        if self.figures:
            from . import plotting

            if self.profiles:
                self._emit(plotting.plot_profiles(self.profiles, self.dir / "observations.png"))
            self._emit(plotting.plot_phases({perf.workers: perf}, self.dir / "phases.png"))
        self._write_manifest("complete")

    def abort(self, perf, message):
        """Record a failed run: perf report plus the diagnostic in the manifest."""
        self.perf = perf
        if perf is not None:
            self._emit(write_perf_report(perf, self.dir / "perf.json", {"error": message}))
        self._write_manifest("failed")


__all__ = [
    "CSV_COLUMNS",
    "OutputBundle",
    "config_hash",
    "observation_rows",
    "speedup_table",
    "write_json",
    "write_observation_csv",
    "write_perf_report",
    "write_speedup_csv",
    "write_vtk",
]
