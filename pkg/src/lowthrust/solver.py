"""Shooting solver for the minimum-fuel boundary-value problem.

The unknowns are the initial costates; the residual stacks the final
equinoctial-element misses (p, f, g, h, k; true longitude free) with the
transversality values lam_m(1) (free final mass) and lam_L(1) (free
final longitude).  The scalar objective is Z = ||residual||^2.

Gradients are state-transition-matrix columns obtained by complex-step
differentiation of the whole propagation: all perturbed columns share
the nominal float trajectory, so one batched complex propagation per
iteration delivers the exact Jacobian of the discrete flow.

Starting from all-zero costates the bang-bang problem is flat (no
thrust anywhere, so Z does not respond to small costate changes).  The
solver therefore bootstraps with smoothed throttle/eclipse gates inside
single-arc averaging -- thrust then responds at any costate -- and
tightens the smoothing over a short continuation before switching to
the exact multi-arc bang-bang dynamics.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import least_squares

from .averaging import (AveragedParams, arc_decomposition, averaged_rhs,
                        brute_force_rates)
from .config import TransferConfig
from .rk import IntegratorConfig, StepUnderflow, Trajectory, integrate
from .smooth import SmoothingParams, UnaveragedParams, unaveraged_rhs
from .units import G0_MS2


def delta_v(m0_kg: float, mf_kg: float, c_ms: float) -> float:
    """Rocket-equation delta-v in km/s from a mass ratio."""
    if not 0.0 < mf_kg <= m0_kg:
        raise ValueError("need 0 < mf <= m0")
    return c_ms * math.log(m0_kg / mf_kg) / 1000.0


@dataclass
class IterationRecord:
    stage: str
    z: float
    lam0: np.ndarray


@dataclass
class TransferSolution:
    converged: bool
    lam0: np.ndarray
    z: float
    residual: np.ndarray
    y_final: np.ndarray
    final_mass_kg: float
    delta_v_kms: float
    n_steps: int
    n_rejected: int
    eclipse_arcs: float
    coast_arcs: float
    thrust_arcs_max: int
    iterations: list
    wall_time_s: float
    trajectory: Optional[Trajectory] = None
    model: str = "averaged"


class _ShootingProblem:
    """Residual/jacobian machinery for one model and one config."""

    def __init__(self, cfg: TransferConfig, model: str,
                 rhs_params, rhs_func: Callable,
                 free_mask: np.ndarray, tol: float):
        self.cfg = cfg
        self.model = model
        self.params = rhs_params
        self.rhs_func = rhs_func
        self.free_mask = free_mask
        self.free_idx = np.nonzero(free_mask)[0]
        self.target = cfg.target_equinoctial()
        self.x0 = cfg.initial_state()
        self.tol = tol
        self.n_evals = 0

    def lam_full(self, lam_free: np.ndarray, lam_base=None) -> np.ndarray:
        lam = np.zeros(9) if lam_base is None else np.array(lam_base)
        lam[self.free_idx] = lam_free
        return lam

    def propagate(self, lam0: np.ndarray, tol: Optional[float] = None,
                  dtype=float) -> Trajectory:
        y0 = np.concatenate([self.x0, lam0]).astype(dtype)
        cfg_i = IntegratorConfig(rel_tol=tol or self.tol,
                                 abs_tol=tol or self.tol)
        rhs = self.rhs_func
        self.n_evals += 1
        return integrate(lambda _t, y: rhs(y, self.params), y0, (0.0, 1.0), cfg_i)

    def residual_of_final(self, yf: np.ndarray) -> np.ndarray:
        res = [yf[0] - self.target[0], yf[1] - self.target[1],
               yf[2] - self.target[2], yf[3] - self.target[3],
               yf[4] - self.target[4]]
        if self.cfg.free_final_mass:
            res.append(yf[17])          # lam_m(1)
        if self.cfg.free_final_longitude:
            res.append(yf[14])          # lam_L(1)
        return np.asarray(res)

    @property
    def n_residuals(self) -> int:
        return 5 + int(self.cfg.free_final_mass) + int(self.cfg.free_final_longitude)

    def residual(self, lam_free: np.ndarray, lam_base=None) -> np.ndarray:
        """Residual vector; failed propagations become a flat penalty so
        the trust region backs off instead of crashing."""
        try:
            traj = self.propagate(self.lam_full(lam_free, lam_base))
            r = self.residual_of_final(traj.y_final)
        except (ValueError, FloatingPointError, StepUnderflow, RuntimeError):
            return np.full(self.n_residuals, 1e3)
        if not np.all(np.isfinite(r)):
            return np.full(self.n_residuals, 1e3)
        return r

    def residual_and_jacobian(self, lam_free: np.ndarray, lam_base=None,
                              hstep: float = 1e-100):
        """Residual and d(residual)/d(lam_free) via batched complex step."""
        nf = len(self.free_idx)
        lam0 = self.lam_full(lam_free, lam_base)
        y0 = np.concatenate([self.x0, lam0]).astype(complex)
        yb = np.tile(y0[:, None], (1, nf + 1))
        for col, idx in enumerate(self.free_idx):
            yb[9 + idx, col + 1] += 1j * hstep
        cfg_i = IntegratorConfig(rel_tol=self.tol, abs_tol=self.tol)
        rhs = self.rhs_func
        self.n_evals += 1 + nf
        try:
            traj = integrate(lambda _t, y: rhs(y, self.params), yb,
                             (0.0, 1.0), cfg_i)
        except (ValueError, FloatingPointError, StepUnderflow, RuntimeError):
            return np.full(self.n_residuals, 1e3), np.zeros((self.n_residuals, nf))
        yf = traj.y_final
        r = self.residual_of_final(yf[:, 0].real)
        jac = np.empty((len(r), nf))
        for col in range(nf):
            rcol = self.residual_of_final(yf[:, col + 1].imag / hstep)
            base = self.residual_of_final(np.zeros(18))
            jac[:, col] = rcol - base   # subtract constant target offsets
        return r, jac


def _least_squares_stage(problem, lam_free0, max_nfev, stage, log,
                         lam_base=None, xtol=1e-14, tol_z=None,
                         chunk: int = 12):
    """Levenberg-Marquardt in chunks with an early exit on Z.

    scipy's LM has no stop-on-cost option, so run it in short bursts and
    break as soon as Z = ||r||^2 reaches tol_z (when given).
    """
    def fun(lf):
        r = problem.residual(lf, lam_base)
        log.append(IterationRecord(stage, float(np.dot(r, r)),
                                   problem.lam_full(lf, lam_base)))
        return r

    def jac(lf):
        _r, j = problem.residual_and_jacobian(lf, lam_base)
        return j

    x = np.asarray(lam_free0, dtype=float)
    spent = 0
    best_x, best_z = x, np.inf
    while spent < max_nfev:
        burst = min(chunk, max_nfev - spent)
        sol = least_squares(fun, x, jac=jac, method="lm", max_nfev=burst,
                            xtol=xtol, ftol=1e-15, gtol=1e-15)
        spent += sol.nfev
        x = sol.x
        z = float(2.0 * sol.cost)
        if z < best_z:
            best_x, best_z = x, z
        if tol_z is not None and z <= tol_z:
            break
        if sol.status in (2, 3, 4):   # converged by its own criteria
            break
    return best_x, best_z


def bvp_cost(lam0, cfg: TransferConfig, tol: Optional[float] = None):
    """Z and the residual vector for candidate initial costates."""
    model = cfg.model
    if model == "averaged":
        problem = _ShootingProblem(cfg, model, cfg.averaged_params(),
                                   averaged_rhs, _free_mask(cfg), tol or cfg.rel_tol)
    else:
        problem = _ShootingProblem(cfg, model, cfg.unaveraged_params(),
                                   unaveraged_rhs, _free_mask(cfg), tol or cfg.rel_tol)
    lam0 = np.asarray(lam0, dtype=float)
    try:
        traj = problem.propagate(lam0)
    except (StepUnderflow, RuntimeError, FloatingPointError) as exc:
        return float("inf"), np.full(7, np.nan)
    r = problem.residual_of_final(traj.y_final)
    return float(np.dot(r, r)), r


def _free_mask(cfg: TransferConfig) -> np.ndarray:
    mask = np.zeros(9, dtype=bool)
    mask[[0, 1, 2, 3, 4]] = True     # lam_p..lam_k
    mask[8] = True                   # lam_m
    mask[5] = cfg.free_lambda_L
    mask[6] = cfg.free_lambda_t
    mask[7] = cfg.free_lambda_alpha
    return mask


@dataclass(frozen=True)
class _SmoothStageParams:
    """Adapter presenting the smoothed brute-force averaged dynamics."""

    base: AveragedParams
    smoothing: SmoothingParams
    n_nodes: int


def _smooth_stage_rhs(y, sp: _SmoothStageParams):
    return brute_force_rates(y, sp.base, n_nodes=sp.n_nodes,
                             smoothing=sp.smoothing)


def solve_transfer(cfg: TransferConfig, verbose: bool = False) -> TransferSolution:
    """Solve the minimum-fuel BVP for the configured model.

    Averaged solves starting from dead costates (no thrust response) run
    a smoothing continuation first; unaveraged solves are expected to be
    seeded (config lambda0), matching their role as a validation model.
    """
    t_start = time.time()
    log: list = []
    lam0 = np.asarray(cfg.lambda0, dtype=float)
    mask = _free_mask(cfg)

    if cfg.model == "averaged":
        problem = _ShootingProblem(cfg, cfg.model, cfg.averaged_params(),
                                   averaged_rhs, mask, cfg.solver_rel_tol)
        if _is_thrust_dead(cfg, lam0):
            lam0 = _smooth_bootstrap(cfg, lam0, mask, log, verbose)
    else:
        problem = _ShootingProblem(cfg, cfg.model, cfg.unaveraged_params(),
                                   unaveraged_rhs, mask, cfg.solver_rel_tol)

    lam_free = lam0[problem.free_idx]
    lam_free, z = _least_squares_stage(problem, lam_free,
                                       cfg.solver_max_iter, cfg.model, log,
                                       lam_base=lam0, tol_z=cfg.solver_tol_z)
    if verbose:
        print(f"[{cfg.model}] Z = {z:.3e} after LM")
    # final verification propagation at reporting tolerance
    lam_final = problem.lam_full(lam_free, lam0)
    problem_hi = _ShootingProblem(cfg, cfg.model, problem.params,
                                  problem.rhs_func, mask, cfg.rel_tol)
    traj = problem_hi.propagate(lam_final)
    r = problem_hi.residual_of_final(traj.y_final)
    z = float(np.dot(r, r))
    yf = traj.y_final

    ecl, coast, thrust_max = _arc_statistics(cfg, traj)
    mf = float(yf[8])
    sol = TransferSolution(
        converged=z < cfg.solver_tol_z,
        lam0=lam_final, z=z, residual=r, y_final=yf,
        final_mass_kg=mf,
        delta_v_kms=delta_v(cfg.mass0_kg, mf, G0_MS2 * cfg.isp_s),
        n_steps=traj.n_steps, n_rejected=traj.n_rejected,
        eclipse_arcs=ecl, coast_arcs=coast, thrust_arcs_max=thrust_max,
        iterations=log, wall_time_s=time.time() - t_start,
        trajectory=traj, model=cfg.model)
    return sol


def _is_thrust_dead(cfg: TransferConfig, lam0: np.ndarray) -> bool:
    """True when S > 0 all around the initial revolution (no response)."""
    from .control import switching_value
    x0 = cfg.initial_state()
    eng = cfg.engine()
    ls = np.linspace(-math.pi, math.pi, 256)
    s = switching_value(x0[0], x0[1], x0[2], x0[3], x0[4], ls, lam0,
                        x0[8], eng.c)
    return bool(np.min(np.asarray(s)) > 0.0)


def _smooth_bootstrap(cfg: TransferConfig, lam0, mask, log, verbose):
    """Smoothing continuation from dead costates to a bang-bang seed.

    The first rung uses a wide sigmoid so the throttle responds at any
    costate magnitude; narrowing it walks the costates into the basin of
    the exact bang-bang problem.  Intermediate rungs do not need to
    converge fully, so iteration caps stay small.
    """
    base = cfg.averaged_params()
    stages = [(3.0, 64, 24, 3e-8, 1e-8), (0.5, 128, 16, 1e-8, 1e-10)]
    lam = np.array(lam0, dtype=float)
    for eps, n_nodes, max_nfev, tol_i, tol_z in stages:
        sp = _SmoothStageParams(base=base,
                                smoothing=SmoothingParams(eps_e=eps, eps_s=eps),
                                n_nodes=n_nodes)
        problem = _ShootingProblem(cfg, "averaged-smooth", sp,
                                   _smooth_stage_rhs, mask, tol_i)
        lam_free, z = _least_squares_stage(
            problem, lam[problem.free_idx], max_nfev,
            f"bootstrap eps={eps}", log, lam_base=lam, tol_z=tol_z)
        lam = problem.lam_full(lam_free, lam)
        if verbose:
            print(f"[bootstrap eps={eps}] Z = {z:.3e}  lam = {lam}")
    return lam


def _arc_statistics(cfg: TransferConfig, traj: Trajectory):
    """Cumulative eclipse/coast arc counts and max simultaneous thrust arcs.

    For the averaged model, arc counts per revolution are integrated
    against the revolution rate (dL/2pi); for the unaveraged model,
    sign-change events of E and S are counted directly.
    """
    if cfg.model == "unaveraged":
        return _unaveraged_event_counts(cfg, traj)
    params = cfg.averaged_params()
    n_ecl = 0.0
    n_coast = 0.0
    thrust_max = 0
    prev_l = None
    for i in range(len(traj.taus)):
        y = traj.states[i]
        d = arc_decomposition(y, params)
        if prev_l is not None:
            drev = (y[5] - prev_l) / (2.0 * math.pi)
            n_ecl += d.eclipse_arc_count * drev
            n_coast += d.coast_arc_count * drev
        thrust_max = max(thrust_max, d.thrust_arc_count)
        prev_l = y[5]
    return float(n_ecl), float(n_coast), int(thrust_max)


def _unaveraged_event_counts(cfg: TransferConfig, traj: Trajectory):
    from .control import switching_value
    from .shadow import eclipse_at_longitude
    params = cfg.unaveraged_params()
    eng = cfg.engine()
    e_prev = None
    s_prev = None
    ecl_entries = 0
    coast_starts = 0
    for i in range(len(traj.taus)):
        y = traj.states[i]
        r_sun = params.ephemeris.position_du(y[6])
        e_val = float(np.asarray(eclipse_at_longitude(
            y[5], y[0], y[1], y[2], y[3], y[4], r_sun, params.shadow)))
        s_val = float(np.asarray(switching_value(
            y[0], y[1], y[2], y[3], y[4], y[5], y[9:], y[8], eng.c)))
        if e_prev is not None and e_prev < 0.0 <= e_val:
            ecl_entries += 1
        if s_prev is not None and s_prev < 0.0 <= s_val:
            coast_starts += 1
        e_prev, s_prev = e_val, s_val
    return float(ecl_entries), float(coast_starts), 0
