"""Command line entry point.

    safecover run <scenario|path> [--safety=on|off] [--mode=saturated|clipped|raw]
                  [--dt=S] [--t-end=S] [--seed-layout=PATH] [--emit-energy]
                  [--emit-plots] [--out=DIR]
    safecover sweep [--family=square|triangle|both] [--n=9,16,25] [--safety=on|off|both]
                    [--t-end=S] [--jobs=K] [--out=DIR]

Exit status: 0 success, 1 invalid scenario or arguments, 2 simulation abort.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import os
import sys

import numpy as np

from . import config, export, sim
from .errors import CoincidentVehicles, NonFiniteState, ParseError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 1, 2

SWEEP_SIZES = {"square": (9, 16, 25), "triangle": (6, 10, 15)}


def _on_off(s):
    s = s.lower()
    if s in ("on", "off"):
        return s == "on"
    raise argparse.ArgumentTypeError(f"expected on or off, got {s!r}")


def read_seed_layout(path):
    """Initial states from a text file: one ``x y [vx vy]`` row per vehicle."""
    try:
        arr = np.loadtxt(path, delimiter=None, comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read seed layout {path}: {exc}") from None
    if arr.shape[1] == 2:
        arr = np.hstack([arr, np.zeros_like(arr)])
    if arr.shape[1] != 4:
        raise ParseError(f"{path}: expected 2 or 4 columns per row, got {arr.shape[1]}")
    return tuple(tuple(float(x) for x in row) for row in arr)


def build_parser():
    ap = argparse.ArgumentParser(prog="safecover", description="Safe coverage swarm simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scenario")
    run.add_argument("scenario", help="built-in name (square16, triangle15, arrow9, ...) or scenario file")
    run.add_argument("--safety", type=_on_off, default=None)
    run.add_argument("--mode", choices=sim.MODES, default=None)
    run.add_argument("--dt", type=float, default=None)
    run.add_argument("--t-end", type=float, default=None)
    run.add_argument("--seed-layout", default=None, help="file of initial x y [vx vy] rows")
    run.add_argument("--emit-energy", action="store_true")
    run.add_argument("--emit-plots", action="store_true")
    run.add_argument("--out", default=None)

    sw = sub.add_parser("sweep", help="collision counts over vehicle counts")
    sw.add_argument("--family", choices=("square", "triangle", "both"), default="both")
    sw.add_argument("--n", default=None, help="comma-separated vehicle counts")
    sw.add_argument("--safety", choices=("on", "off", "both"), default="both")
    sw.add_argument("--t-end", type=float, default=None)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out", default=None)
    return ap


def resolve_config(args):
    cfg = config.load_scenario(args.scenario)
    kw = {}
    if args.safety is not None:
        kw["safety_enabled"] = args.safety
    if args.mode is not None:
        kw["mode"] = args.mode
    if args.dt is not None:
        kw["dt"] = args.dt
    if args.t_end is not None:
        kw["t_end"] = args.t_end
    if args.seed_layout is not None:
        states = read_seed_layout(args.seed_layout)
        kw.update(layout="explicit", explicit_states=states, n_vehicles=len(states))
    if args.out is not None:
        kw["out_dir"] = args.out
    return config.validate(cfg.with_overrides(**kw)) if kw else cfg


def simulate(cfg):
    p0, v0 = cfg.initial_states()
    return sim.run(p0, v0, cfg.domain(), cfg.sim_params())


def _run_command(args):
    cfg = resolve_config(args)
    traj = simulate(cfg)
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    stem = os.path.join(out, cfg.name)
    summary = {"scenario": cfg.name, **traj.summary(cfg.eps_v)}
    export.write_trajectory(traj, stem + "_trajectory.csv")
    export.write_summary(summary, stem + "_summary.json")
    if args.emit_energy:
        export.write_energy(traj, stem + "_energy.csv")
    if args.emit_plots:
        times = cfg.snapshots or (float(traj.times[-1]),)
        export.emit_plot_data(traj, times, cfg.tail, out, stem=f"{cfg.name}_snapshot")
    verdict = "r_d-subcover" if summary["r_subcover"] else "not an r_d-subcover"
    print(f"{cfg.name}: {summary['collision_events']} collision events, {verdict}, "
          f"steady time {summary['steady_time']}")
    return EXIT_OK


def _sweep_one(job):
    family, n, safety, t_end = job
    cfg = config.builtin(f"{family}{n}").with_overrides(safety_enabled=safety)
    if t_end is not None:
        cfg = cfg.with_overrides(t_end=t_end)
    traj = simulate(cfg)
    return {"scenario": cfg.name, "safety": safety, "collision_events": len(traj.events)}


def _sweep_command(args):
    families = ("square", "triangle") if args.family == "both" else (args.family,)
    safeties = (True, False) if args.safety == "both" else (args.safety == "on",)
    jobs = []
    for fam in families:
        sizes = tuple(int(x) for x in args.n.split(",")) if args.n else SWEEP_SIZES[fam]
        jobs += [(fam, n, s, args.t_end) for n in sizes for s in safeties]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    for row in rows:
        print(f"{row['scenario']:<12} safety={'on ' if row['safety'] else 'off'} "
              f"collisions={row['collision_events']}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "sweep.json"), "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return EXIT_OK


def run_cli(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; keep 2 for simulation aborts
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        if args.command == "run":
            return _run_command(args)
        return _sweep_command(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonFiniteState, CoincidentVehicles) as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
