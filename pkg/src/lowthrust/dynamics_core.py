"""Shared pointwise Hamiltonian evaluation for both dynamics models.

Everything here is dtype-generic (floats, complex, duals) and vectorized
over a trailing node/batch axis.  The augmented state ordering is

    y = [p, f, g, h, k, L, t, alpha, m, lam_p..lam_m]  (18 entries)

and both dynamics models are Hamiltonian flows of some scalar H(y):
xdot = dH/dlam, lamdot = -dH/dx.  The right-hand sides in this package
are produced by exact forward-mode differentiation of the implemented
H, so conservation along trajectories holds to integration tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import btlam, j2_accel_rtn
from .generic import cos as gcos, sin as gsin, sqrt

# guards the primer-norm derivative at exactly-zero costates; far below
# any physical magnitude so sqrt(b^2 + eps) == ||b|| in double precision
_NORM_GUARD = 1e-300


@dataclass(frozen=True)
class J2Config:
    enabled: bool = False
    j2: float = 0.00108263
    re_du: float = 1.0

    def accel(self, p, f, fg, h, k, L, mu=1.0):
        if not self.enabled:
            return None
        return j2_accel_rtn(p, f, fg, h, k, L, self.j2, self.re_du, mu)


def primer_norm(p, f, fg, h, k, L, lam, mu=1.0):
    """||lam^T B||, guarded against a zero gradient at lam = 0."""
    bR, bT, bN = btlam(p, f, fg, h, k, L, lam, mu)
    return sqrt(bR * bR + bT * bT + bN * bN + _NORM_GUARD), (bR, bT, bN)


def hamiltonian_point(p, f, fg, h, k, L, lam, m, alpha, thrust, c,
                      gamma=None, mu=1.0, extra_cost=0.0):
    """Primer-substituted Hamiltonian at one longitude.

    Args:
        thrust: effective thrust magnitude (canonical force), already
            combining T_min, T_max, k_e, and sigma.
        gamma: optional RTN perturbation triple.
        extra_cost: additional running-cost term (used by the smoothed
            model's sqrt(sigma - sigma^2) penalty).
    """
    bnorm, b = primer_norm(p, f, fg, h, k, L, lam, mu)
    # A-vector contraction: only the L and t entries are nonzero
    cl, sl = gcos(L), gsin(L)
    w = 1.0 + f * cl + fg * sl
    a_l = sqrt(mu * p) * (w / p) * (w / p)
    ham = (thrust / c) * (1.0 - lam[8]) + lam[5] * a_l + lam[6] \
        - (thrust / m) * bnorm + extra_cost
    if gamma is not None:
        ham = ham + b[0] * gamma[0] + b[1] * gamma[1] + b[2] * gamma[2]
    return alpha * ham


def s_factor(p, f, fg, L):
    """Averaging weight s = n / Ldot = (1 - f^2 - g^2)^(3/2) / w^2."""
    one_e2 = 1.0 - f * f - fg * fg
    w = 1.0 + f * gcos(L) + fg * gsin(L)
    return one_e2 * sqrt(one_e2) / (w * w)


def sh_integrand(p, f, fg, h, k, cl, sl, lam, m, alpha, thrust, c,
                 j2cfg, mu=1.0):
    """Fused s*H evaluation at quadrature nodes given cos/sin of L.

    Same quantity as s_factor(...) * hamiltonian_point(...); written with
    shared subexpressions because this is the hot path of the averaged
    dynamics (and of every derivative taken through them).
    """
    w = 1.0 + f * cl + fg * sl
    winv = 1.0 / w
    ps = sqrt(p / mu)
    s2 = 1.0 + h * h + k * k
    hk = h * sl - k * cl
    b_r = ps * (lam[1] * sl - lam[2] * cl)
    b_t = ps * winv * (2.0 * p * lam[0]
                       + lam[1] * ((w + 1.0) * cl + f)
                       + lam[2] * ((w + 1.0) * sl + fg))
    b_n = ps * winv * (hk * (lam[2] * f - lam[1] * fg + lam[5])
                       + 0.5 * s2 * (lam[3] * cl + lam[4] * sl))
    bnorm = sqrt(b_r * b_r + b_t * b_t + b_n * b_n + _NORM_GUARD)
    a_l = sqrt(mu * p) * (w / p) * (w / p)
    ham = (thrust / c) * (1.0 - lam[8]) + lam[5] * a_l + lam[6] \
        - (thrust / m) * bnorm
    if j2cfg is not None and j2cfg.enabled:
        r = p * winv
        r2 = r * r
        fac = (mu * j2cfg.j2 * j2cfg.re_du * j2cfg.re_du) / (r2 * r2)
        s2i = 1.0 / (s2 * s2)
        g_r = -1.5 * fac * (1.0 - 12.0 * hk * hk * s2i)
        g_t = -12.0 * fac * hk * (h * cl + k * sl) * s2i
        g_n = -6.0 * fac * hk * (1.0 - h * h - k * k) * s2i
        ham = ham + b_r * g_r + b_t * g_t + b_n * g_n
    one_e2 = 1.0 - f * f - fg * fg
    sfac = one_e2 * sqrt(one_e2) * winv * winv
    return alpha * sfac * ham


def unpack2d(y):
    """Split y of shape (18,) or (18, batch) into 18 (1, batch) components."""
    arr = np.asarray(y)
    batch = arr.shape[1:]
    comps = [arr[i].reshape(1, -1) for i in range(18)]
    return comps, batch


def pack_rates(rates, batch_shape, dtype):
    """Assemble 18 (1, batch)-shaped component rates back into y-layout."""
    tail = tuple(batch_shape)
    out = np.empty((18,) + tail, dtype=dtype)
    for i, r in enumerate(rates):
        r2 = np.asarray(r)
        if tail:
            out[i] = np.broadcast_to(r2.reshape(1, -1)[0], tail)
        else:
            out[i] = r2.reshape(-1)[0]
    return out


def hamiltonian_rates(grad18):
    """Symplectic pairing: gradient of H -> (xdot, lamdot) component list."""
    xdot = [grad18[9 + i] for i in range(9)]
    lamdot = [-grad18[i] for i in range(9)]
    return xdot + lamdot


def hessian_to_rhs_jac(ham):
    """RHS vector and Jacobian from a doubly-seeded Hamiltonian value.

    ``ham`` must come from evaluating H with components seeded twice
    (outer layer for the Jacobian, inner layer for the H-gradient).
    The Hessian of H is symmetric, so the seed-axis order is immaterial.
    """
    from .generic import value
    d_h = np.asarray(value(ham.grad)).reshape(18)
    d2_h = np.asarray(value(ham.grad.grad)).reshape(18, 18)
    rhs = np.concatenate([d_h[9:], -d_h[:9]])
    jac = np.concatenate([d2_h[9:], -d2_h[:9]], axis=0)
    return rhs, jac
