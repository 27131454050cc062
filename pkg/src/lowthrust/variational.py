"""State transition matrices for the averaged flow, plus error metrics.

The 18x18 Jacobian of the averaged right-hand side is obtained by
running a second forward-derivative layer through the same Hamiltonian
evaluation that produces the dynamics: the result is the exact Hessian
of the quadrature Hamiltonian, including root motion, node motion, and
the second derivatives of the root longitudes that the Leibniz terms
require.  The STM is then integrated as Phidot = J(y) Phi alongside y.

The independent oracle is a complex-step derivative of the whole
discrete flow: propagate y0 + ih e_j with the same fixed steps and take
Im(y_f)/h.  Fixed-step propagation keeps both paths on the identical
discrete trajectory, so the comparison isolates derivative errors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import generic as g
from .averaging import AveragedParams, arc_decomposition, averaged_hamiltonian
from .dynamics_core import hessian_to_rhs_jac, unpack2d
from .rk import IntegratorConfig, Trajectory, integrate


def averaged_jacobian(y, params: AveragedParams):
    """RHS and exact (18, 18) Jacobian of the averaged dynamics.

    Raises:
        ValueError: at switching-root tangencies (the decomposition
            drops such roots and flags the arcs; the Jacobian of the
            degraded field is still returned when only flagged merges
            occurred, but a fully degenerate structure is rejected).
    """
    yv = np.asarray(y, dtype=float)
    comp, _ = unpack2d(yv)
    decomp = arc_decomposition(comp, params)
    outer = g.seed(comp)
    inner = g.seed(outer)
    ham = averaged_hamiltonian(inner, params, decomp)
    return hessian_to_rhs_jac(ham)


def stm_rhs(y, phi, params: AveragedParams):
    """(ydot, Phidot) with Phidot = Jacobian * Phi."""
    rhs, jac = averaged_jacobian(y, params)
    return rhs, jac @ phi


def propagate_with_stm(y0, params: AveragedParams, n_steps: int,
                       tau_span=(0.0, 1.0),
                       jacobian: Optional[Callable] = None):
    """Fixed-step propagation of y and Phi (18x18) together.

    Returns (trajectory of stacked [y, vec(Phi)], final Phi).
    """
    jac_of = jacobian or (lambda yy: averaged_jacobian(yy, params))

    def rhs(_tau, z):
        y = z[:18]
        phi = z[18:].reshape(18, 18)
        dy, jac = jac_of(y)
        return np.concatenate([dy, (jac @ phi).ravel()])

    z0 = np.concatenate([np.asarray(y0, dtype=float), np.eye(18).ravel()])
    cfg = IntegratorConfig(mode="fixed", fixed_steps=n_steps)
    traj = integrate(rhs, z0, tau_span, cfg)
    return traj, traj.y_final[18:].reshape(18, 18)


def complex_step_stm(y0, rhs_of, n_steps: int, tau_span=(0.0, 1.0),
                     hstep: float = 1e-100):
    """Flow-derivative oracle: one batched complex fixed-step propagation.

    All 18 columns share the float part, so the arc structure and the
    step sequence match the nominal trajectory exactly.
    """
    y0 = np.asarray(y0, dtype=float)
    yb = np.tile(y0.astype(complex)[:, None], (1, 18))
    for j in range(18):
        yb[j, j] += 1j * hstep
    cfg = IntegratorConfig(mode="fixed", fixed_steps=n_steps)
    traj = integrate(rhs_of, yb, tau_span, cfg)
    return traj.y_final.imag / hstep


def stm_relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise difference normalized by row/column magnitude of b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    row_max = np.max(np.abs(b), axis=1)   # max over columns for each row
    col_max = np.max(np.abs(b), axis=0)
    denom = np.maximum(1.0, np.maximum(row_max[:, None], col_max[None, :]))
    return float(np.max(np.abs(a - b) / denom))


def rms_difference(y_a: np.ndarray, y_b: np.ndarray,
                   scale: np.ndarray) -> float:
    """Root-mean-square relative difference across the 18 components.

    ``scale`` is the per-component max magnitude of the reference
    trajectory over the whole transfer (floored at 1).
    """
    y_a = np.asarray(y_a, dtype=float)
    y_b = np.asarray(y_b, dtype=float)
    d = (y_a - y_b) / np.maximum(1.0, np.asarray(scale, dtype=float))
    return float(np.sqrt(np.sum(d * d)))
