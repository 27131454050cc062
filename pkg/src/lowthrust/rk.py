"""High-order explicit Runge-Kutta propagation with step logging.

The tableau is the 12-stage 8th-order Dormand-Prince method (coefficient
tables reused from scipy's DOP853 implementation) with its embedded
5th/3rd-order error estimator and a PI step-size controller.  Two modes:

* adaptive: error-controlled variable steps, the workhorse;
* fixed: exactly n equal steps, no error control, dtype-agnostic --
  used wherever two propagations must follow the identical discrete
  path (variational-equation vs. complex-step comparisons) or where a
  batch of perturbed trajectories must share a grid.

Each accepted step is logged so step counts and dense output can be
reported and compared across models.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

try:
    from scipy.integrate._ivp import dop853_coefficients as _dop
except ImportError as exc:  # pragma: no cover
    raise ImportError("scipy >= 1.4 with the DOP853 tables is required") from exc

_N_STAGES = _dop.N_STAGES          # 12
_A = _dop.A[:_N_STAGES, :_N_STAGES]
_B = _dop.B
_C = _dop.C[:_N_STAGES]
_E3 = _dop.E3
_E5 = _dop.E5
_ORDER_ERR = 7  # local error estimator order used for step control


class StepUnderflow(RuntimeError):
    """Adaptive step fell below the floor; carries the failure location."""

    def __init__(self, tau: float, step: float):
        super().__init__(
            f"step size underflow at tau={tau:.9g} (h={step:.3e}); "
            "right-hand side is too rough here (unregularized eclipse "
            "singularity is the usual culprit)")
        self.tau = tau
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    mode: str = "adaptive"          # adaptive | fixed
    fixed_steps: int = 1000
    max_steps: int = 2_000_000
    min_step: float = 1e-12
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 10.0
    pi_beta: float = 0.04           # PI stabilization exponent

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0 or self.fixed_steps <= 0:
            raise ValueError("step counts must be positive")
        if self.mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class Trajectory:
    """Accepted-step log of one propagation."""

    taus: np.ndarray
    states: np.ndarray              # (n_steps+1,) + y.shape
    n_steps: int
    n_rejected: int
    n_rhs: int

    @property
    def y_final(self) -> np.ndarray:
        return self.states[-1]

    def sample(self, i: int):
        return self.taus[i], self.states[i]


def _rk_step(rhs, tau, y, h, k1):
    """One DOP853 core step; returns (y_new, k_stages)."""
    k = [k1]
    for s in range(1, _N_STAGES):
        dy = _A[s, 0] * k[0]
        for j in range(1, s):
            if _A[s, j] != 0.0:
                dy = dy + _A[s, j] * k[j]
        k.append(rhs(tau + _C[s] * h, y + h * dy))
    acc = _B[0] * k[0]
    for j in range(1, _N_STAGES):
        if _B[j] != 0.0:
            acc = acc + _B[j] * k[j]
    return y + h * acc, k


def _error_norm(k, h, scale):
    err5 = sum(_E5[j] * k[j] for j in range(_N_STAGES)) / scale
    err3 = sum(_E3[j] * k[j] for j in range(_N_STAGES)) / scale
    e5 = float(np.linalg.norm(np.asarray(err5).ravel()))
    e3 = float(np.linalg.norm(np.asarray(err3).ravel()))
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    denom = e5 * e5 + 0.01 * e3 * e3
    n = np.asarray(err5).size
    return abs(h) * e5 * e5 / np.sqrt(denom * n)


def integrate(rhs: Callable, y0, tau_span=(0.0, 1.0),
              cfg: IntegratorConfig = IntegratorConfig(),
              callback: Optional[Callable] = None) -> Trajectory:
    """Propagate dy/dtau = rhs(tau, y) over tau_span.

    Args:
        rhs: right-hand side; must accept (tau, y) with y of the same
            shape/dtype as y0.
        y0: initial condition (any shape; flattening is never assumed).
        cfg: integrator settings.
        callback: optional per-accepted-step hook (tau, y).

    Returns:
        Trajectory with the accepted-step log.

    Raises:
        StepUnderflow: adaptive step below cfg.min_step.
        RuntimeError: cfg.max_steps exceeded.
    """
    t0, tf = float(tau_span[0]), float(tau_span[1])
    y = np.array(y0, copy=True)
    taus = [t0]
    states = [y.copy()]
    n_rhs = 0

    if cfg.mode == "fixed":
        h = (tf - t0) / cfg.fixed_steps
        tau = t0
        for i in range(cfg.fixed_steps):
            k1 = rhs(tau, y)
            y, _ = _rk_step(rhs, tau, y, h, k1)
            n_rhs += _N_STAGES
            tau = t0 + (i + 1) * h
            taus.append(tau)
            states.append(y.copy())
            if callback is not None:
                callback(tau, y)
        return Trajectory(np.asarray(taus), np.asarray(states),
                          cfg.fixed_steps, 0, n_rhs)

    span = tf - t0
    tau = t0
    h = span / 100.0
    err_prev = 1.0
    n_acc = 0
    n_rej = 0
    alpha = 1.0 / (_ORDER_ERR + 1) - 0.75 * cfg.pi_beta
    while tau < tf - 1e-15 * abs(span):
        if n_acc + n_rej >= cfg.max_steps:
            raise RuntimeError(f"max_steps={cfg.max_steps} exceeded at tau={tau}")
        h = min(h, tf - tau)
        if h < cfg.min_step * abs(span):
            raise StepUnderflow(tau, h)
        k1 = rhs(tau, y)
        y_new, k = _rk_step(rhs, tau, y, h, k1)
        n_rhs += _N_STAGES
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(
            np.abs(np.asarray(y)), np.abs(np.asarray(y_new)))
        err = _error_norm(k, h, scale)
        if err <= 1.0 or h <= cfg.min_step * abs(span) * 1.01:
            tau = tau + h
            y = y_new
            n_acc += 1
            taus.append(tau)
            states.append(y.copy())
            if callback is not None:
                callback(tau, y)
            if err == 0.0:
                factor = cfg.max_factor
            else:
                factor = cfg.safety * err ** (-alpha) * err_prev ** cfg.pi_beta
                factor = min(cfg.max_factor, max(cfg.min_factor, factor))
            err_prev = max(err, 1e-4)
            h = h * factor
        else:
            n_rej += 1
            factor = max(cfg.min_factor,
                         cfg.safety * err ** (-1.0 / (_ORDER_ERR + 1)))
            h = h * factor
    return Trajectory(np.asarray(taus), np.asarray(states), n_acc, n_rej, n_rhs)
