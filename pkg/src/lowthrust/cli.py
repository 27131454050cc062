"""Command-line entry points.

Subcommands: propagate, solve, compare, probe-singularity,
emit-switching.  Exit codes: 0 success, 1 numeric failure, 2 usage.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from pathlib import Path

import numpy as np

from .averaging import averaged_rhs, singularity_probe
from .config import TransferConfig, parse_config
from .rk import IntegratorConfig, StepUnderflow, integrate
from .smooth import unaveraged_rhs
from .solver import TransferSolution, delta_v, solve_transfer
from .units import G0_MS2


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lowthrust",
        description="Orbit-averaged minimum-fuel low-thrust transfers")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="propagate a configured transfer")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fixed-steps", type=int, default=0,
                   help="use fixed-step mode with this many steps")
    p.add_argument("--lambda0", default=None,
                   help="comma-separated 9 costates overriding the config")

    p = sub.add_parser("solve", help="solve the transfer BVP")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("compare", help="RMS difference of two emitted runs")
    p.add_argument("--avg", required=True, help="directory of the averaged run")
    p.add_argument("--unavg", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("probe-singularity",
                       help="eclipse-shrink response with/without the fix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--widths", default="1e-2,1e-3,1e-4,1e-5,1e-6")
    p.add_argument("--lambda0", default=None)

    p = sub.add_parser("emit-switching",
                       help="switching function and polynomial over one period")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--at", default="tau=0.0,0.5,1.0")
    p.add_argument("--grid", type=int, default=2048)
    return ap


def _parse_lambda0(text):
    vals = [float(v) for v in text.replace(",", " ").split()]
    if len(vals) != 9:
        raise ValueError("lambda0 override needs 9 values")
    return np.asarray(vals)


def _cmd_propagate(args) -> int:
    from . import outputs
    cfg = parse_config(args.config)
    lam0 = _parse_lambda0(args.lambda0) if args.lambda0 else None
    y0 = cfg.initial_y(lam0)
    params = cfg.averaged_params() if cfg.model == "averaged" \
        else cfg.unaveraged_params()
    rhs = averaged_rhs if cfg.model == "averaged" else unaveraged_rhs
    if args.fixed_steps > 0:
        icfg = IntegratorConfig(mode="fixed", fixed_steps=args.fixed_steps)
    else:
        icfg = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    t0 = time.time()
    traj = integrate(lambda _t, y: rhs(y, params), y0, (0.0, 1.0), icfg)
    wall = time.time() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs.write_states_csv(traj, cfg, out / "states.csv")
    outputs.write_kepler_csv(traj, cfg, out / "kepler.csv")
    outputs.write_control_csv(traj, cfg, out / "control.csv")
    mf = float(traj.y_final[8])
    (out / "summary.txt").write_text(
        f"model = {cfg.model}\n"
        f"final_mass_kg = {mf:.9f}\n"
        f"delta_v_kms = {delta_v(cfg.mass0_kg, mf, G0_MS2 * cfg.isp_s):.9f}\n"
        f"integration_steps = {traj.n_steps}\n"
        f"rejected_steps = {traj.n_rejected}\n"
        f"wall_time_s = {wall:.3f}\n", encoding="utf-8")
    return 0


def _cmd_solve(args) -> int:
    from . import outputs
    cfg = parse_config(args.config)
    sol = solve_transfer(cfg, verbose=args.verbose)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs.write_states_csv(sol.trajectory, cfg, out / "states.csv")
    outputs.write_kepler_csv(sol.trajectory, cfg, out / "kepler.csv")
    outputs.write_control_csv(sol.trajectory, cfg, out / "control.csv")
    outputs.write_summary(sol, cfg, out / "summary.txt")
    return 0 if sol.converged else 1


def _cmd_compare(args) -> int:
    from . import outputs
    cfg = parse_config(args.config)
    t_a, y_a = outputs.read_states_csv(Path(args.avg) / "states.csv", cfg)
    t_u, y_u = outputs.read_states_csv(Path(args.unavg) / "states.csv", cfg)
    taus, rms = outputs.compare_state_logs(t_a, y_a, t_u, y_u)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs.write_rms_csv(taus, rms, out / "rms.csv")
    return 0


def _cmd_probe(args) -> int:
    cfg = parse_config(args.config)
    lam0 = _parse_lambda0(args.lambda0) if args.lambda0 else None
    y0 = cfg.initial_y(lam0)
    params = cfg.averaged_params()
    widths = [float(w) for w in args.widths.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "singularity.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["dl_target", "dl_achieved", "lamdot_norm_raw",
                     "lamdot_norm_regularized"])
        for w in widths:
            rep = singularity_probe(y0, params, w)
            wr.writerow([f"{rep.dl_target:.3e}", f"{rep.dl_achieved:.6e}",
                         f"{rep.rhs_norm_raw:.9e}",
                         f"{rep.rhs_norm_regularized:.9e}"])
    return 0


def _cmd_emit_switching(args) -> int:
    from .control import switching_poly_coeffs, switching_value
    cfg = parse_config(args.config)
    spec = args.at
    if not spec.startswith("tau="):
        raise ValueError("--at must look like tau=0.0,0.5,1.0")
    taus = [float(v) for v in spec[4:].split(",")]
    params = cfg.averaged_params()
    y0 = cfg.initial_y()
    icfg = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    traj = integrate(lambda _t, y: averaged_rhs(y, params), y0, (0.0, 1.0), icfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eng = cfg.engine()
    grid = np.linspace(-math.pi, math.pi, args.grid, endpoint=True)
    for tau in taus:
        i = int(np.argmin(np.abs(traj.taus - tau)))
        y = traj.states[i]
        s_vals = switching_value(y[0], y[1], y[2], y[3], y[4], grid,
                                 y[9:], y[8], eng.c)
        sp = switching_poly_coeffs(y[0], y[1], y[2], y[3], y[4], y[9:],
                                   y[8], eng.c)
        sp_vals = sp(np.tan(grid / 2.0))
        fname = out / f"switching_tau{tau:.3f}.csv".replace("-", "m")
        with open(fname, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["L_rad", "S", "S_poly"])
            for l_, s_, q_ in zip(grid, np.asarray(s_vals), np.asarray(sp_vals)):
                wr.writerow([f"{l_:.12f}", f"{s_:.16e}", f"{q_:.16e}"])
    return 0


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {
        "propagate": _cmd_propagate,
        "solve": _cmd_solve,
        "compare": _cmd_compare,
        "probe-singularity": _cmd_probe,
        "emit-switching": _cmd_emit_switching,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StepUnderflow, RuntimeError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
