"""Smooth-Heaviside unaveraged dynamics.

Discontinuous bang-bang control and the hard eclipse gate are replaced
by steep sigmoids so the full 18-dimensional state+costate system is a
single smooth Hamiltonian flow.  The costate rates are the exact
gradient of the implemented Hamiltonian (forward-mode duals), so the
Hamiltonian is conserved along trajectories to integration tolerance;
the system is autonomous because epoch time rides along as a state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import generic as g
from .dynamics_core import (J2Config, hamiltonian_point, hamiltonian_rates,
                            hessian_to_rhs_jac, pack_rates, primer_norm,
                            unpack2d)
from .control import EngineParams
from .shadow import ShadowConfig, SunEphemeris, eclipse_function
from .elements import position_vec
from .generic import Dual, sqrt, value


@dataclass(frozen=True)
class SmoothingParams:
    """Sigmoid widths for the eclipse gate (eps_e) and throttle (eps_s)."""

    eps_e: float = 3.0e-5
    eps_s: float = 1.0e-5

    def __post_init__(self) -> None:
        if self.eps_e <= 0 or self.eps_s <= 0:
            raise ValueError("smoothing parameters must be positive")


def ke_smooth(e_val, eps_e):
    """Smooth eclipse gate: 1 deep in sunlight, 0 deep in shadow."""
    return 0.5 * (1.0 - e_val / sqrt(e_val * e_val + eps_e * eps_e))


def sigma_smooth(s_val, eps_s):
    """Smooth throttle minimizing the penalized Hamiltonian."""
    return 0.5 * (1.0 - s_val / sqrt(s_val * s_val + eps_s * eps_s))


@dataclass(frozen=True)
class UnaveragedParams:
    """Everything the unaveraged right-hand side needs."""

    engine: EngineParams
    smoothing: SmoothingParams
    ephemeris: SunEphemeris
    shadow: ShadowConfig
    j2: J2Config = J2Config()
    mu: float = 1.0


def smooth_hamiltonian(comp, params: UnaveragedParams):
    """H of the smoothed model from 18 ambient components."""
    p, f, fg, h, k, L, t, alpha, m = comp[:9]
    lam = comp[9:]
    eng = params.engine
    eps = params.smoothing

    r_sun = params.ephemeris.position_du(t)
    rr = position_vec(p, f, fg, h, k, L)
    e_val = eclipse_function(r_sun, rr, params.shadow)
    ke = ke_smooth(e_val, eps.eps_e)

    bnorm, _ = primer_norm(p, f, fg, h, k, L, lam, params.mu)
    s_val = 1.0 - lam[8] - (eng.c / m) * bnorm
    sig = sigma_smooth(s_val, eps.eps_s)

    dthrust = eng.t_max - eng.t_min
    thrust = eng.t_min + dthrust * ke * sig
    # penalty from the smoothed running cost; sigma in (0,1) strictly
    extra = -(dthrust / eng.c) * ke * eps.eps_s * sqrt(sig - sig * sig)
    gamma = params.j2.accel(p, f, fg, h, k, L, params.mu)
    return hamiltonian_point(p, f, fg, h, k, L, lam, m, alpha, thrust,
                             eng.c, gamma=gamma, mu=params.mu,
                             extra_cost=extra)


def _gradient_rates(comp, params):
    """Hamiltonian gradient -> rate components, each (1, batch)-shaped."""
    seeded = g.seed(comp)
    ham = smooth_hamiltonian(seeded, params)
    return hamiltonian_rates([ham.grad[i] for i in range(18)])


def unaveraged_rhs(y, params: UnaveragedParams):
    """Right-hand side dy/dtau for the smoothed 18-dim system.

    Accepts float or complex y of shape (18,) or (18, batch); batch
    members are evaluated simultaneously.
    """
    comp, batch = unpack2d(y)
    rates = _gradient_rates(comp, params)
    return pack_rates(rates, batch, np.asarray(y).dtype)


def unaveraged_hamiltonian(y, params: UnaveragedParams) -> float:
    """H(y) itself (conservation checks and derivative oracles)."""
    comp, batch = unpack2d(y)
    ham = smooth_hamiltonian(comp, params)
    return np.asarray(ham).reshape(tuple(batch) or (1,))[0] if not batch \
        else np.asarray(ham).reshape(batch)


def unaveraged_jacobian(y, params: UnaveragedParams):
    """RHS and its exact (18, 18) Jacobian at float y of shape (18,)."""
    comp, _ = unpack2d(np.asarray(y, dtype=float))
    outer = g.seed(comp)
    inner = g.seed(outer)
    ham = smooth_hamiltonian(inner, params)
    return hessian_to_rhs_jac(ham)
