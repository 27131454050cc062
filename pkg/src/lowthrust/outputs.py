"""CSV and report emission for propagation runs and solves."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .config import TransferConfig
from .elements import EquinoctialState, equinoctial_to_keplerian
from .rk import Trajectory
from .solver import TransferSolution

STATE_HEADER = ["tau", "t_et_s", "p_du", "f", "g", "h", "k", "L_rad",
                "alpha_tu", "m_kg", "lam_p", "lam_f", "lam_g", "lam_h",
                "lam_k", "lam_L", "lam_t", "lam_alpha", "lam_m"]


def write_states_csv(traj: Trajectory, cfg: TransferConfig, path) -> None:
    tu = cfg.units.tu_s
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(STATE_HEADER)
        for tau, y in zip(traj.taus, traj.states):
            row = [f"{tau:.16e}", f"{cfg.epoch_et_s + y[6] * tu:.10f}"]
            row += [f"{v:.16e}" for v in y[:6]]
            row += [f"{y[7]:.16e}", f"{y[8]:.16e}"]
            row += [f"{v:.16e}" for v in y[9:18]]
            wr.writerow(row)


def read_states_csv(path, cfg: TransferConfig):
    """Rebuild (taus, y-history) from a states.csv written by this package."""
    taus, ys = [], []
    tu = cfg.units.tu_s
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        for rec in rd:
            taus.append(float(rec["tau"]))
            y = [float(rec[k]) for k in STATE_HEADER[2:8]]
            y.append((float(rec["t_et_s"]) - cfg.epoch_et_s) / tu)
            y += [float(rec["alpha_tu"]), float(rec["m_kg"])]
            y += [float(rec[k]) for k in STATE_HEADER[10:]]
            ys.append(y)
    return np.asarray(taus), np.asarray(ys)


def write_kepler_csv(traj: Trajectory, cfg: TransferConfig, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau", "a_km", "e", "i_deg", "aop_deg", "raan_deg",
                     "ta_deg", "degenerate"])
        for tau, y in zip(traj.taus, traj.states):
            st = EquinoctialState(p=y[0], f=y[1], g=y[2], h=y[3], k=y[4],
                                  L=math.remainder(y[5], 2.0 * math.pi),
                                  t=y[6], alpha=y[7], m=y[8])
            kep = equinoctial_to_keplerian(st)
            wr.writerow([f"{tau:.16e}", f"{kep.a * cfg.du_km:.9f}",
                         f"{kep.e:.12f}", f"{math.degrees(kep.inc):.9f}",
                         f"{math.degrees(kep.aop):.9f}",
                         f"{math.degrees(kep.raan):.9f}",
                         f"{math.degrees(kep.ta):.9f}",
                         int(kep.degenerate_aop_raan)])


def write_control_csv(traj: Trajectory, cfg: TransferConfig, path) -> None:
    """Control diagnostics: pointwise for unaveraged, arc table for averaged."""
    from .control import switching_value
    from .shadow import eclipse_at_longitude
    from .smooth import ke_smooth, sigma_smooth
    from .averaging import arc_decomposition

    eng = cfg.engine()
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        if cfg.model == "unaveraged":
            params = cfg.unaveraged_params()
            wr.writerow(["tau", "S", "E", "sigma", "ke"])
            for tau, y in zip(traj.taus, traj.states):
                r_sun = params.ephemeris.position_du(y[6])
                e_val = float(np.asarray(eclipse_at_longitude(
                    y[5], y[0], y[1], y[2], y[3], y[4], r_sun, params.shadow)))
                s_val = float(np.asarray(switching_value(
                    y[0], y[1], y[2], y[3], y[4], y[5], y[9:], y[8], eng.c)))
                wr.writerow([f"{tau:.16e}", f"{s_val:.16e}", f"{e_val:.16e}",
                             f"{float(np.asarray(sigma_smooth(s_val, cfg.eps_s))):.12f}",
                             f"{float(np.asarray(ke_smooth(e_val, cfg.eps_e))):.12f}"])
        else:
            params = cfg.averaged_params()
            wr.writerow(["tau", "arc_index", "l_start_rad", "l_end_rad",
                         "sigma", "ke", "n_quad", "in_shadow"])
            for tau, y in zip(traj.taus, traj.states):
                d = arc_decomposition(y, params)
                for i, a in enumerate(d.arcs):
                    wr.writerow([f"{tau:.16e}", i, f"{a.l_start:.12f}",
                                 f"{a.l_end:.12f}", a.sigma, f"{a.ke:.12f}",
                                 a.n_quad, int(a.in_shadow)])


def write_summary(sol: TransferSolution, cfg: TransferConfig, path) -> None:
    lines = [
        f"model = {sol.model}",
        f"converged = {sol.converged}",
        f"final_mass_kg = {sol.final_mass_kg:.9f}",
        f"delta_v_kms = {sol.delta_v_kms:.9f}",
        f"Z = {sol.z:.6e}",
        "residual = " + " ".join(f"{v:.6e}" for v in sol.residual),
        "lambda0 = " + " ".join(f"{v:.15e}" for v in sol.lam0),
        f"eclipse_arcs = {sol.eclipse_arcs:.2f}",
        f"coast_arcs = {sol.coast_arcs:.2f}",
        f"max_thrust_arcs_per_rev = {sol.thrust_arcs_max}",
        f"integration_steps = {sol.n_steps}",
        f"rejected_steps = {sol.n_rejected}",
        f"wall_time_s = {sol.wall_time_s:.3f}",
        f"solver_iterations = {len(sol.iterations)}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_rms_csv(taus, rms, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau", "rms_difference"])
        for t, r in zip(taus, rms):
            wr.writerow([f"{t:.16e}", f"{r:.16e}"])


def compare_state_logs(taus_avg, ys_avg, taus_unavg, ys_unavg):
    """RMS relative difference on a shared tau grid.

    The denser log must contain the sparser one's grid (fixed-step runs
    with an integer step-count ratio).  Scaling is the per-component max
    magnitude of the unaveraged history.
    """
    from .variational import rms_difference
    if len(taus_unavg) < len(taus_avg):
        raise ValueError("expected the unaveraged log to be at least as dense")
    stride = (len(taus_unavg) - 1) // (len(taus_avg) - 1)
    if (len(taus_unavg) - 1) % (len(taus_avg) - 1) != 0:
        raise ValueError("step grids are not nested")
    sub = ys_unavg[::stride]
    sub_t = taus_unavg[::stride]
    if not np.allclose(sub_t, taus_avg, atol=1e-12):
        raise ValueError("tau grids do not match")
    scale = np.max(np.abs(ys_unavg), axis=0)
    rms = [rms_difference(a, b, scale) for a, b in zip(ys_avg, sub)]
    return np.asarray(taus_avg), np.asarray(rms)
