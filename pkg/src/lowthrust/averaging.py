"""Multi-arc orbit-averaged dynamics with Leibniz boundary terms.

One revolution is split at the exact roots of the switching function
(at most 6) and of the eclipse function (normally 0 or 2).  Each arc
carries frozen control flags, and the averaged Hamiltonian is the
arc-wise Gauss-Legendre sum

    Htilde = (1/2pi) sum_j (L*_j - L*_{j-1})/2 sum_i w_i s H |_{L_i}.

Because the integration bounds are roots that move with the state and
costate, the averaged equations of motion pick up Leibniz boundary
contributions.  Here the right-hand side is computed as the *exact*
symplectic gradient of the implemented quadrature Hamiltonian (forward
duals through the root solves, node maps, arc widths, and the
regularized in-eclipse thrust floor), which realizes those boundary
terms with implicit-function root sensitivities and keeps Htilde
conserved along trajectories to integration tolerance.

The in-eclipse thrust floor removes the singularity that otherwise
appears as an eclipse arc shrinks to zero length: the boundary-term
factor dL*/dy blows up while the integrand difference across the
boundary stays finite, so the floor drives that difference to zero at
the same rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from . import generic as g
from .control import EngineParams, switching_poly_coeffs, switching_roots
from .dynamics_core import (J2Config, hamiltonian_point, hamiltonian_rates,
                            hessian_to_rhs_jac, pack_rates, s_factor,
                            sh_integrand, unpack2d)
from .elements import wrap_angle
from .generic import Dual, concat_nodes, node_sum, value
from .shadow import ShadowConfig, SunEphemeris, eclipse_at_longitude, \
    eclipse_roots, ke_regularized

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=256)
def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre nodes/weights on (-1, 1)."""
    if n < 1:
        raise ValueError("quadrature order must be >= 1")
    z, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(order=n, nodes=z, weights=w)


def quadrature_count(l_a: float, l_b: float, q: int) -> int:
    """Per-arc node count: q * [1 + 2*round(arc length in rad)].

    Rounding is half-away-from-zero (arc lengths are non-negative).
    """
    if l_b <= l_a:
        raise ValueError("need l_b > l_a")
    return int(q * (1 + 2 * math.floor(l_b - l_a + 0.5)))


@dataclass(frozen=True)
class AveragingConfig:
    q: int = 6
    dl_star: float = 0.08
    regularize: bool = True
    polish_iters: int = 2
    tangency_slope_tol: float = 1e-12
    merge_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be >= 1")


@dataclass(frozen=True)
class AveragedParams:
    engine: EngineParams
    ephemeris: SunEphemeris
    shadow: ShadowConfig
    averaging: AveragingConfig = AveragingConfig()
    j2: J2Config = J2Config()
    mu: float = 1.0


@dataclass
class Arc:
    """One integration arc of the revolution tiling (-pi, pi]."""

    l_start: float
    l_end: float
    sigma: float                 # 0/1 thrust flag from sign of S at midpoint
    ke: float                    # 0/1 eclipse flag, or regularized floor
    n_quad: int
    kind_start: str              # 'period' | 'switch' | 'eclipse'
    kind_end: str
    in_shadow: bool
    flagged: bool = False        # merged/tangent degeneracies

    @property
    def width(self) -> float:
        return self.l_end - self.l_start


@dataclass
class ArcDecomposition:
    arcs: list
    switch_roots: np.ndarray
    eclipse_entry: Optional[float]
    eclipse_exit: Optional[float]
    eclipse_width: float
    flagged: bool = False

    @property
    def thrust_arc_count(self) -> int:
        """Thrusting arcs per revolution, wrap-merged."""
        return _wrap_merged_count(self.arcs, lambda a: a.sigma > 0.5 and a.ke > 0.0)

    @property
    def eclipse_arc_count(self) -> int:
        return 1 if self.eclipse_entry is not None else 0

    @property
    def coast_arc_count(self) -> int:
        """Sunlit coasting arcs per revolution, wrap-merged."""
        return _wrap_merged_count(
            self.arcs, lambda a: a.sigma < 0.5 and not a.in_shadow)


def _wrap_merged_count(arcs, pred):
    """Count maximal runs of arcs satisfying pred, cyclically."""
    flags = [bool(pred(a)) for a in arcs]
    if not any(flags):
        return 0
    if all(flags):
        return 1
    prev = flags[-1]
    count = 0
    for fl in flags:
        if fl and not prev:
            count += 1
        prev = fl
    return count


def _sun_du(params: AveragedParams, t):
    return params.ephemeris.position_du(t)


def _float_y18(y) -> np.ndarray:
    """Representative float (18,) vector from y or a component list."""
    if isinstance(y, (list, tuple)):
        return np.array([np.asarray(value(c)).reshape(-1)[0].real for c in y])
    return np.asarray(value(y)).reshape(18, -1)[:, 0].real.astype(float)


def arc_decomposition(y, params: AveragedParams) -> ArcDecomposition:
    """Split one revolution at switching and eclipse roots (float path).

    Flags per arc come from midpoint signs of S and E; the in-eclipse
    thrust floor is attached per the regularized constraint whenever the
    eclipse arc is shorter than dl_star.
    """
    yv = _float_y18(y)
    p, f, fg, h, k = yv[0], yv[1], yv[2], yv[3], yv[4]
    t, m = yv[6], yv[8]
    lam = yv[9:18]
    eng = params.engine
    acfg = params.averaging
    flagged = False

    # switching roots via the polynomial, validated against S
    def s_of(L):
        from .control import switching_value
        return value(switching_value(p, f, fg, h, k, L, lam, m, eng.c, params.mu))

    sp = switching_poly_coeffs(p, f, fg, h, k, lam, m, eng.c, params.mu)
    try:
        s_roots = switching_roots(sp, s_of, merge_tol=acfg.merge_tol)
    except ValueError:
        s_roots = np.empty(0)

    # drop tangent switch roots: Leibniz terms divide by dS/dL there
    if len(s_roots):
        hstep = 1e-6
        rr = np.asarray(s_roots, dtype=float)
        slopes = (np.asarray(s_of(rr + hstep)) - np.asarray(s_of(rr - hstep))) \
            / (2.0 * hstep)
        ok = np.abs(slopes) >= acfg.tangency_slope_tol
        flagged = flagged or not np.all(ok)
        s_roots = [float(r) for r in rr[ok]]
    else:
        s_roots = []

    r_sun = tuple(float(np.asarray(value(c)).reshape(-1)[0].real)
                  for c in _sun_du(params, t))
    ecl = eclipse_roots(p, f, fg, h, k, r_sun, params.shadow)
    if ecl.tangent:
        flagged = True

    bounds = [(-math.pi, "period"), (math.pi, "period")]
    bounds += [(r, "switch") for r in s_roots]
    if ecl.count == 2:
        bounds += [(ecl.entry, "eclipse"), (ecl.exit, "eclipse")]
    bounds.sort(key=lambda b: b[0])

    # merge near-coincident boundaries, keeping the first
    merged = [bounds[0]]
    for b in bounds[1:]:
        if b[0] - merged[-1][0] < acfg.merge_tol:
            if merged[-1][1] != b[1]:
                flagged = True
            continue
        merged.append(b)
    if merged[-1][1] != "period":
        merged.append((math.pi, "period"))

    ew = ecl.width() if ecl.count == 2 else 0.0

    spans = [(la, ka, lb, kb) for (la, ka), (lb, kb)
             in zip(merged[:-1], merged[1:]) if lb - la >= acfg.merge_tol]
    mids = np.array([0.5 * (la + lb) for la, _, lb, _ in spans])
    s_mid = np.asarray(s_of(mids), dtype=float).reshape(len(spans), -1)[:, 0]
    if ecl.count == 2:
        e_mid = np.asarray(value(eclipse_at_longitude(
            mids, p, f, fg, h, k, r_sun, params.shadow)),
            dtype=float).reshape(len(spans), -1)[:, 0]
    else:
        e_mid = np.full(len(spans), -1.0)

    arcs = []
    for i, (la, ka, lb, kb) in enumerate(spans):
        sigma = 1.0 if s_mid[i] < 0.0 else 0.0
        in_shadow = bool(e_mid[i] > 0.0)
        if not in_shadow:
            ke = 1.0
        elif not acfg.regularize or ew >= acfg.dl_star:
            ke = 0.0
        else:
            ke = float(value(ke_regularized(ew, params.shadow)))
        arcs.append(Arc(l_start=la, l_end=lb, sigma=sigma, ke=ke,
                        n_quad=quadrature_count(la, lb, acfg.q),
                        kind_start=ka, kind_end=kb, in_shadow=in_shadow,
                        flagged=flagged))
    return ArcDecomposition(arcs=arcs, switch_roots=np.asarray(s_roots),
                            eclipse_entry=ecl.entry, eclipse_exit=ecl.exit,
                            eclipse_width=ew, flagged=flagged)


def _polish_batch(func, roots, zero, iters):
    """Newton-polish roots (vectorized) in the ambient arithmetic.

    The float slope is enough: the fixed point of the ambient iteration
    carries the exact implicit-function derivatives of the roots, and
    two to three passes contract any seeding error below roundoff.
    Returns a list of ambient (1, B)-shaped root longitudes.
    """
    if not roots:
        return []
    r = np.asarray(roots, dtype=float)[:, None]       # (R, 1)
    hstep = 1e-6
    fp = np.asarray(value(func(r + hstep)), dtype=complex).real
    fm = np.asarray(value(func(r - hstep)), dtype=complex).real
    d = ((fp - fm) / (2.0 * hstep)).reshape(len(roots), -1)[:, :1]  # (R, 1)
    L = r + zero                                      # lift to ambient
    for _ in range(iters):
        L = L - func(L) / d
    return [g.take_node(L, i) for i in range(len(roots))]


def averaged_hamiltonian(comp, params: AveragedParams,
                         decomp: Optional[ArcDecomposition] = None):
    """Quadrature-averaged Hamiltonian from 18 ambient (1, B) components.

    The arc structure (root count, flags, node counts) is resolved on
    the float part; bounds, the eclipse width, and the thrust floor are
    then lifted into the ambient arithmetic so that every derivative of
    the returned value carries the Leibniz boundary sensitivities.
    """
    p, f, fg, h, k, _L, t, alpha, m = comp[:9]
    lam = comp[9:]
    eng = params.engine
    acfg = params.averaging
    if decomp is None:
        decomp = arc_decomposition(list(comp), params)

    r_sun = _sun_du(params, t)

    def s_amb(L):
        from .control import switching_value
        return switching_value(p, f, fg, h, k, L, lam, m, eng.c, params.mu)

    def e_amb(L):
        return eclipse_at_longitude(L, p, f, fg, h, k, r_sun, params.shadow)

    zero = p * 0.0  # ambient zero, used to lift float constants

    # lift boundary longitudes into the ambient arithmetic (batched per kind)
    keys = []
    for arc in decomp.arcs:
        for lv, kind in ((arc.l_start, arc.kind_start), (arc.l_end, arc.kind_end)):
            if (lv, kind) not in keys:
                keys.append((lv, kind))
    switch_keys = [kv for kv in keys if kv[1] == "switch"]
    eclipse_keys = [kv for kv in keys if kv[1] == "eclipse"]
    lifted = {kv: kv[0] + zero for kv in keys if kv[1] == "period"}
    for kv, amb in zip(switch_keys,
                       _polish_batch(s_amb, [kv[0] for kv in switch_keys],
                                     zero, acfg.polish_iters)):
        lifted[kv] = amb
    for kv, amb in zip(eclipse_keys,
                       _polish_batch(e_amb, [kv[0] for kv in eclipse_keys],
                                     zero, acfg.polish_iters)):
        lifted[kv] = amb

    # regularized floor from the lifted eclipse width
    ke_floor = None
    if (decomp.eclipse_entry is not None and acfg.regularize
            and 0.0 < decomp.eclipse_width < acfg.dl_star
            and (decomp.eclipse_entry, "eclipse") in lifted
            and (decomp.eclipse_exit, "eclipse") in lifted):
        l_in = lifted[(decomp.eclipse_entry, "eclipse")]
        l_out = lifted[(decomp.eclipse_exit, "eclipse")]
        width = l_out - l_in
        if decomp.eclipse_exit < decomp.eclipse_entry:
            width = width + TWO_PI
        ke_floor = ke_regularized(width, params.shadow)

    node_parts = []
    coef_parts = []
    thrust_parts = []
    for arc in decomp.arcs:
        la = lifted[(arc.l_start, arc.kind_start)]
        lb = lifted[(arc.l_end, arc.kind_end)]
        rule = gauss_legendre(arc.n_quad)
        u = ((rule.nodes + 1.0) / 2.0)[:, None]     # (n, 1)
        wgt = rule.weights[:, None]
        width = lb - la
        node_parts.append(la + width * u)
        coef_parts.append(width * (wgt / (2.0 * TWO_PI)))
        if arc.in_shadow and ke_floor is not None:
            ke_arc = ke_floor
        else:
            ke_arc = arc.ke + zero
        thrust = eng.t_min + (eng.t_max - eng.t_min) * ke_arc * arc.sigma
        # multiply by ones so gradients carry the full per-node shape
        thrust_parts.append(thrust * (0.0 * u + 1.0))

    nodes = concat_nodes(node_parts)
    coefs = concat_nodes(coef_parts)
    thrusts = concat_nodes(thrust_parts)

    cl, sl = g.cos(nodes), g.sin(nodes)
    integ = sh_integrand(p, f, fg, h, k, cl, sl, lam, m, alpha, thrusts,
                         eng.c, params.j2, params.mu)
    return node_sum(coefs * integ)


def _gradient_rates(comp, params, decomp=None):
    seeded = g.seed(comp)
    ham = averaged_hamiltonian(seeded, params, decomp)
    return hamiltonian_rates([ham.grad[i] for i in range(18)])


def averaged_rhs(y, params: AveragedParams,
                 decomp: Optional[ArcDecomposition] = None):
    """dy/dtau of the averaged system: exact gradient of Htilde.

    Accepts float or complex y of shape (18,) or (18, batch); batched
    evaluation requires all members to share the float part (as in
    complex-step columns), since the arc structure is resolved once.
    """
    comp, batch = unpack2d(y)
    if decomp is None:
        decomp = arc_decomposition(comp, params)
    rates = _gradient_rates(comp, params, decomp)
    return pack_rates(rates, batch, np.asarray(y).dtype)


def averaged_hamiltonian_value(y, params: AveragedParams):
    """Htilde(y) for conservation checks and finite-difference oracles."""
    comp, batch = unpack2d(y)
    ham = averaged_hamiltonian(comp, params)
    out = np.asarray(ham)
    return out.reshape(batch) if batch else out.reshape(-1)[0]


def brute_force_rates(y, params: AveragedParams, n_nodes: int = 4096,
                      smoothing=None):
    """Single-arc averaging oracle with pointwise flags at dense nodes.

    With ``smoothing`` set, the hard sigma/k_e gates become the smooth
    sigmoids (used by the solver's continuation bootstrap); otherwise
    pointwise bang-bang and hard eclipse gating reproduce the multi-arc
    dynamics up to quadrature error.
    """
    comp, batch = unpack2d(y)
    seeded = g.seed(comp)
    ham = brute_force_hamiltonian(seeded, params, n_nodes, smoothing)
    rates = hamiltonian_rates([ham.grad[i] for i in range(18)])
    return pack_rates(rates, batch, np.asarray(y).dtype)


def brute_force_hamiltonian(comp, params: AveragedParams,
                            n_nodes: int = 4096, smoothing=None):
    """Fixed-bound quadrature of s*H over (-pi, pi] with pointwise gates."""
    from .control import switching_value
    from .smooth import ke_smooth, sigma_smooth

    p, f, fg, h, k, _L, t, alpha, m = comp[:9]
    lam = comp[9:]
    eng = params.engine
    rule = gauss_legendre(n_nodes)
    nodes = (math.pi * rule.nodes)[:, None]
    coefs = (rule.weights / 2.0)[:, None]  # (1/2pi) * (pi) * w_i

    r_sun = _sun_du(params, t)
    e_val = eclipse_at_longitude(nodes, p, f, fg, h, k, r_sun, params.shadow)
    s_val = switching_value(p, f, fg, h, k, nodes, lam, m, eng.c, params.mu)
    if smoothing is None:
        ke = g.where(np.asarray(value(e_val)).real < 0.0,
                     1.0 + 0.0 * e_val, 0.0 * e_val)
        sig = g.where(np.asarray(value(s_val)).real < 0.0,
                      1.0 + 0.0 * s_val, 0.0 * s_val)
    else:
        ke = ke_smooth(e_val, smoothing.eps_e)
        sig = sigma_smooth(s_val, smoothing.eps_s)
    thrust = eng.t_min + (eng.t_max - eng.t_min) * ke * sig
    gamma = params.j2.accel(p, f, fg, h, k, nodes, params.mu)
    hnode = hamiltonian_point(p, f, fg, h, k, nodes, lam, m, alpha,
                              thrust, eng.c, gamma=gamma, mu=params.mu)
    return node_sum(coefs * s_factor(p, f, fg, nodes) * hnode)


@dataclass
class SingularityReport:
    dl_target: float
    dl_achieved: float
    rhs_norm_raw: float
    rhs_norm_regularized: float


def singularity_probe(y, params: AveragedParams, dl_target: float,
                      t_window: float = 4000.0) -> SingularityReport:
    """Measure ||lamdot|| with and without the eclipse-floor fix.

    Scans the epoch (Sun position) inside ``t_window`` TU to place the
    eclipse arc width at ``dl_target``, then evaluates the averaged
    right-hand side both ways at that geometry.
    """
    y = np.array(y, dtype=float)

    def width_at(tval):
        y2 = y.copy()
        y2[6] = tval
        return arc_decomposition(y2, params).eclipse_width

    t_lo, t_hi = y[6], y[6] + t_window
    n_scan = 64
    ts = np.linspace(t_lo, t_hi, n_scan)
    ws = np.array([width_at(tv) for tv in ts])
    mask = ws > 0.0
    if not np.any(mask):
        raise ValueError("no eclipse inside the scan window")
    # bracket dl_target along the scan
    idx = None
    for i in range(n_scan - 1):
        if (ws[i] - dl_target) * (ws[i + 1] - dl_target) <= 0.0 and \
                (ws[i] > 0.0 or ws[i + 1] > 0.0):
            idx = i
            break
    if idx is None:
        idx = int(np.argmin(np.abs(ws - dl_target)))
        a = b = ts[idx]
    else:
        a, b = ts[idx], ts[idx + 1]
    for _ in range(80):
        midt = 0.5 * (a + b)
        if (width_at(a) - dl_target) * (width_at(midt) - dl_target) <= 0.0:
            b = midt
        else:
            a = midt
    t_star = 0.5 * (a + b)
    y2 = y.copy()
    y2[6] = t_star

    p_reg = params
    if not params.averaging.regularize:
        p_reg = replace(params, averaging=replace(params.averaging, regularize=True))
    p_raw = replace(params, averaging=replace(p_reg.averaging, regularize=False))

    lam_dot_reg = averaged_rhs(y2, p_reg)[9:]
    lam_dot_raw = averaged_rhs(y2, p_raw)[9:]
    return SingularityReport(
        dl_target=dl_target,
        dl_achieved=width_at(t_star),
        rhs_norm_raw=float(np.linalg.norm(lam_dot_raw)),
        rhs_norm_regularized=float(np.linalg.norm(lam_dot_reg)),
    )
