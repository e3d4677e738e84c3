"""Command-line interface.

Exit codes: 0 success, 1 monitor or verification failure, 2 configuration
error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import materials
from .config import SimulationConfig, parse_config
from .errors import ConfigError, DomainError, SolverError
from .fire import BoundaryParams, make_scenario, thermal_load
from .output import emit_outputs, fmt
from .solver import simulate

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("hygrotherm")


# -- run ------------------------------------------------------------------------


def run_config(cfg: SimulationConfig, out_dir=None) -> dict:
    """Simulate ``cfg`` and write all outputs; returns the manifest."""
    problem = cfg.to_problem()
    state = cfg.initial(problem)
    out = out_dir or cfg.directory
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "steps.log"), "w", encoding="utf-8", newline="\n") as log_file:
        series = simulate(problem, state, cfg.t_end, cfg.snapshot_times, cfg.probe_points,
                          log_file=log_file)
    return emit_outputs(series, cfg, out, problem.scenario)


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    try:
        manifest = run_config(cfg, args.out)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    mon = manifest["monitor"]
    print(f"{mon['steps']} steps, w_min={mon['w_min']:.6g}, d_min={mon['d_min']:.6g}, "
          f"violations={mon['violations']}")
    return EXIT_OK if mon["passed"] else EXIT_FAILURE


def _sweep_one(path):
    cfg = parse_config(path)
    stem = os.path.splitext(os.path.basename(path))[0]
    out = os.path.join(os.path.dirname(path), f"{stem}_out")
    try:
        manifest = run_config(cfg, out)
    except SolverError as exc:
        return path, False, str(exc)
    return path, manifest["monitor"]["passed"], out


def cmd_sweep(args) -> int:
    paths = sorted(os.path.join(args.directory, f) for f in os.listdir(args.directory)
                   if f.endswith((".ini", ".cfg")))
    if not paths:
        raise ConfigError(f"no .ini or .cfg files in {args.directory}")
    for p in paths:  # validate everything before starting any run
        parse_config(p)
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(_sweep_one, paths))
    for path, ok, info in results:
        print(f"{'ok  ' if ok else 'FAIL'} {path} -> {info}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAILURE


# -- fire curves and material tables ------------------------------------------------


def cmd_fire_curve(args) -> int:
    sc = make_scenario(args.scenario)
    bp = BoundaryParams.for_scenario(sc) if args.alpha_c is None \
        else BoundaryParams.for_scenario(sc, alpha_c=args.alpha_c)
    if not args.t_end >= 0 or not args.dt > 0:
        raise ConfigError("T must be >= 0 and --dt > 0")
    ts = np.arange(0.0, args.t_end + 0.5 * args.dt, args.dt)
    ts = ts[ts <= args.t_end]
    rows = ["t_s,theta_inf_K,vartheta_Wm2"]
    for t, th, q in zip(ts, sc.gas_temperature(ts), thermal_load(sc, bp, ts)):
        rows.append(f"{fmt(t)},{fmt(th)},{fmt(q)}")
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


MATERIAL_TABLES = {
    "saturation_pressure": (("P_sat_Pa",), "theta"),
    "porosity": (("n",), "theta"),
    "d_eq": (("d_eq_kgm3",), "theta"),
    "sorption_pressure": (("P_Pa",), "theta_w"),
    "sorption_derivatives": (("dP_dtheta", "dP_dw"), "theta_w"),
    "coefficients": (("delta_w", "delta_theta", "lam"), "theta_w"),
    "saturation_degree": (("S",), "theta_p"),
    "conductivity": (("lambda",), "theta_p"),
    "permeability": (("kappa",), "theta_p"),
}


def _material_values(which, th, second, mp):
    if which == "saturation_pressure":
        return (materials.saturation_pressure(th),)
    if which == "porosity":
        return (materials.porosity(th, mp),)
    if which == "d_eq":
        return (materials.dehydration_equilibrium(th, mp),)
    if which == "sorption_pressure":
        return (materials.sorption_pressure(th, second, mp),)
    if which == "sorption_derivatives":
        return materials.sorption_pressure_derivatives(th, second, mp)
    if which == "coefficients":
        c = materials.transformed_coefficients(th, second, mp)
        return c.delta_w, c.delta_theta, c.lam
    if which == "saturation_degree":
        return (materials.saturation_degree(th, second, mp),)
    if which == "conductivity":
        return (materials.thermal_conductivity(th, second, mp),)
    return (materials.permeability(th, second, mp),)


def cmd_materials(args) -> int:
    cols, kind = MATERIAL_TABLES[args.which]
    mp = parse_config(args.config).build_materials() if args.config else materials.DEFAULT_PARAMS
    th = np.linspace(args.theta_min, args.theta_max, args.n_theta)
    if kind == "theta":
        grid_t, second, header = th, None, "theta_K"
    else:
        lo, hi = (args.w_min, args.w_max) if kind == "theta_w" else (args.p_min, args.p_max)
        sec = np.linspace(lo, hi, args.n_second)
        grid_t, second = (a.ravel() for a in np.meshgrid(th, sec, indexing="ij"))
        header = "theta_K," + ("w_kgm3" if kind == "theta_w" else "P_Pa")
    values = [np.atleast_1d(np.asarray(v, dtype=float)) for v in _material_values(args.which, grid_t, second, mp)]
    rows = [header + "," + ",".join(cols)]
    for i in range(grid_t.size):
        lead = [grid_t[i]] if second is None else [grid_t[i], second[i]]
        rows.append(",".join(fmt(v) for v in lead + [col[i] for col in values]))
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- verification -------------------------------------------------------------------


def verify_audit(n_samples=10_000):
    from .verify.audit import assumption_audit
    rep = assumption_audit(n_samples=n_samples)
    return rep.passed, rep.as_dict()


def verify_mms():
    from .verify.mms import spatial_convergence, temporal_convergence
    space = spatial_convergence()
    time_ = temporal_convergence()
    passed = space.order >= 1.9 and time_.order >= 0.9
    return passed, {"passed": passed, "space": space.as_dict(), "time": time_.as_dict(),
                    "thresholds": {"space": 1.9, "time": 0.9}}


def verify_weakform(t_end=1800.0):
    from .verify.weakform import refinement_study
    report = refinement_study(t_end=t_end)
    return report["passed"], report


def cmd_verify(args) -> int:
    if args.what == "audit":
        passed, report = verify_audit(args.samples)
    elif args.what == "mms":
        passed, report = verify_mms()
    else:
        passed, report = verify_weakform(args.t_end)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK if passed else EXIT_FAILURE


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hygrotherm",
                                description="Heat and moisture transport in a concrete wall under fire.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one simulation from a configuration file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [output] directory)")
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("fire-curve", help="tabulate a fire curve as CSV")
    f.add_argument("scenario", help="iso, hc, pm or constant")
    f.add_argument("t_end", type=float, metavar="T", help="horizon in seconds")
    f.add_argument("--dt", type=float, default=60.0, help="sampling interval in seconds")
    f.add_argument("--alpha-c", type=float, default=None, help="film coefficient override")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fire_curve)

    m = sub.add_parser("materials", help="constitutive tables")
    msub = m.add_subparsers(dest="action", required=True)
    d = msub.add_parser("dump", help="tabulate a constitutive function as CSV")
    d.add_argument("which", choices=sorted(MATERIAL_TABLES))
    d.add_argument("--config", help="take material constants from this configuration")
    d.add_argument("--theta-min", type=float, default=293.15)
    d.add_argument("--theta-max", type=float, default=1273.15)
    d.add_argument("--n-theta", type=int, default=21)
    d.add_argument("--w-min", type=float, default=0.0)
    d.add_argument("--w-max", type=float, default=150.0)
    d.add_argument("--p-min", type=float, default=0.0)
    d.add_argument("--p-max", type=float, default=2e6)
    d.add_argument("--n-second", type=int, default=11)
    d.add_argument("--out")
    d.set_defaults(func=cmd_materials)

    v = sub.add_parser("verify", help="verification reports as JSON")
    v.add_argument("what", choices=("audit", "mms", "weakform"))
    v.add_argument("--samples", type=int, default=10_000, help="audit sample count")
    v.add_argument("--t-end", type=float, default=1800.0, help="weak-form run length in seconds")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run every configuration in a directory")
    s.add_argument("directory")
    s.add_argument("--jobs", type=int, default=None)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
