"""Command-line interface.

    hydrotherm run <config.json> [--workers N] [--out DIR] [--snapshot-every K]
    hydrotherm scenario ates|ates-fine|pile-desk|pile-full --emit <path>
    hydrotherm bench <config.json> --workers 1,2,4,8 [--steps N] [--out DIR]
    hydrotherm verify

Exit codes: 0 success, 1 configuration error, 2 solver failure (or a failed
verification check), 3 I/O failure.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigurationError, HydrothermError, OutputError, SolverError
from .parallel import default_workers

log = logging.getLogger("hydrotherm")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _worker_list(text):
    try:
        out = [int(w) for w in text.split(",") if w.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"worker counts must be >= 1, got {text!r}")
    return sorted(set(out))


def build_parser():
    from .scenarios import BUILDERS

    p = _Parser(prog="hydrotherm", description="Coupled groundwater flow and heat transport simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log every time step")
    sub = p.add_subparsers(dest="command", metavar="{run,scenario,bench,verify}", parser_class=_Parser)

    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config", type=Path)
    r.add_argument("--workers", type=int, default=None, help="default: HYDROTHERM_WORKERS or the config value")
    r.add_argument("--out", type=Path, default=None, help="run directory (default: runs/<scenario name>)")
    r.add_argument("--snapshot-every", type=int, default=None, metavar="K", help="write fields every K steps")
    r.add_argument("--steps", type=int, default=None, help="stop after this many steps")
    r.add_argument("--no-vtk", action="store_true", help="skip field snapshots")
    r.add_argument("--no-figures", action="store_true", help="skip the PNG report figures")

    s = sub.add_parser("scenario", help="write a built-in scenario config")
    s.add_argument("name", choices=sorted(BUILDERS))
    s.add_argument("--emit", type=Path, required=True, metavar="PATH")

    b = sub.add_parser("bench", help="scaling study over worker counts")
    b.add_argument("config", type=Path)
    b.add_argument("--workers", type=_worker_list, default=[1, 2, 4, 8])
    b.add_argument("--steps", type=int, default=None, help="steps per run (default: the full schedule)")
    b.add_argument("--out", type=Path, default=Path("bench"))

    sub.add_parser("verify", help="run the analytical verification suite")
    return p


def _load(path):
    from .scenarios import ScenarioConfig

    if not path.is_file():
        raise OutputError(f"cannot read config {path}: no such file")
    return ScenarioConfig.from_json(path)


def _controls(cfg, steps=None, snapshot_every=None):
    t = cfg.time
    if steps is not None:
        if steps < 1:
            raise ConfigurationError(f"--steps must be >= 1, got {steps}")
        t = replace(t, t_end=steps * t.h)
    if snapshot_every is not None:
        if snapshot_every < 1:
            raise ConfigurationError(f"--snapshot-every must be >= 1, got {snapshot_every}")
        t = replace(t, output_every=snapshot_every)
    return replace(cfg, time=t).validate()


def _workers(arg, cfg):
    if arg is not None:
        return arg
    import os

    return default_workers() if os.environ.get("HYDROTHERM_WORKERS") else cfg.workers


def cmd_run(args):
    from .output import OutputBundle
    from .sim import run

    cfg = _load(args.config)
    cfg = _controls(cfg, args.steps, args.snapshot_every).with_workers(_workers(args.workers, cfg)).validate()
    out = args.out or Path("runs") / cfg.name
    bundle = OutputBundle(out, cfg, vtk=not args.no_vtk, figures=not args.no_figures)
    try:
        state, perf = run(cfg, sinks=[bundle])
    except SolverError as exc:
        bundle.abort(getattr(exc, "perf", None), str(exc))
        raise
    print(f"{cfg.name}: {perf.steps} steps, {perf.dofs} dofs, {perf.workers} workers, {perf.total:.2f} s -> {out}")
    return 0


def cmd_scenario(args):
    from .scenarios import BUILDERS

    cfg = BUILDERS[args.name]()
    try:
        cfg.to_json(args.emit)
    except OSError as exc:
        raise OutputError(f"cannot write {args.emit}: {exc.strerror or exc}") from None
    print(f"wrote {args.name} config to {args.emit}")
    return 0


def cmd_bench(args):
    from . import plotting
    from .output import speedup_table, write_json, write_speedup_csv
    from .sim import run

    cfg = _controls(_load(args.config), args.steps)
    workers = args.workers if 1 in args.workers else [1] + args.workers
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {args.out}: {exc.strerror or exc}") from None
    reports = {}
    for w in workers:
        _, perf = run(cfg, workers=w)
        reports[w] = perf
        print(f"workers={w}: total {perf.total:.3f} s", flush=True)
    speed = speedup_table(reports)
    write_speedup_csv(reports, args.out / "speedup.csv")
    write_json({"scenario": cfg.name, "runs": {str(w): r.to_dict() for w, r in reports.items()},
                "speedup": {str(w): v for w, v in speed.items()}}, args.out / "bench.json")
    plotting.plot_scaling(reports, args.out / "scaling.png")
    plotting.plot_phases(reports, args.out / "phases.png")
    print(f"{'workers':>8} {'total_s':>10} {'speedup':>8}")
    for w, r in sorted(reports.items()):
        print(f"{w:>8d} {r.total:>10.3f} {speed[w]:>8.3f}")
    return 0


def cmd_verify(args):
    from .verify import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


COMMANDS = {"run": cmd_run, "scenario": cmd_scenario, "bench": cmd_bench, "verify": cmd_verify}


def cli_main(argv=None):
    """Parse ``argv`` and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except HydrothermError as exc:
        kind = type(exc).__name__
        print(f"hydrotherm {args.command}: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"hydrotherm {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
