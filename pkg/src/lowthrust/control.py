"""Primer vector, switching function/polynomial, and the Hamiltonian.

The bang-bang thrust decision is the sign of the reduced switching
function

    S = 1 - lam_m - (c/m) * ||lam^T B||,

thrust on where S < 0.  Over one revolution with the non-longitude
variables frozen, the roots of S coincide with the real roots of a
sixth-order polynomial in tan(L/2).  Rather than transcribing the closed
form of its seven coefficients, this module assembles them exactly from
samples of the squared switching condition:

    G(L) = w^2 [c^2 ||lam^T B||^2 - m^2 (1 - lam_m)^2]

is a trigonometric polynomial of degree 4 in L, so 16 equispaced samples
determine it; the identity e^{iL} = (1+ix)^2/(1+x^2) with x = tan(L/2)
converts it to a degree-8 polynomial in x that is exactly divisible by
(1+x^2).  Both the Fourier projection and the deflation are linear, so
the whole construction collapses into one precomputed 7x16 matrix
applied to the samples.  Squaring can introduce spurious roots; every
candidate is re-validated against S itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .elements import EquinoctialState, Costate, btlam, gauss_ab, wrap_angle
from .generic import sqrt, value
from .units import CanonicalUnits, EARTH_UNITS, G0_MS2


@dataclass(frozen=True)
class EngineParams:
    """Engine limits in SI plus their canonical-unit images."""

    t_max_n: float
    t_min_n: float = 0.0
    isp_s: float = 3000.0
    g0_ms2: float = G0_MS2
    units: CanonicalUnits = EARTH_UNITS
    t_max: float = field(init=False)   # kg*DU/TU^2
    t_min: float = field(init=False)
    c: float = field(init=False)       # DU/TU

    def __post_init__(self) -> None:
        if not self.t_max_n > self.t_min_n >= 0.0:
            raise ValueError("need t_max_n > t_min_n >= 0")
        if self.isp_s <= 0 or self.g0_ms2 <= 0:
            raise ValueError("isp and g0 must be positive")
        u = self.units
        object.__setattr__(self, "t_max", u.thrust_n_to_canonical(self.t_max_n))
        object.__setattr__(self, "t_min", u.thrust_n_to_canonical(self.t_min_n))
        object.__setattr__(self, "c",
                           u.speed_ms_to_canonical(self.g0_ms2 * self.isp_s))

    @property
    def c_ms(self) -> float:
        return self.g0_ms2 * self.isp_s


@dataclass(frozen=True)
class SwitchingPolynomial:
    """Coefficients beta_1..beta_7 of the tan(L/2) polynomial (descending)."""

    beta: np.ndarray

    def __post_init__(self) -> None:
        if np.shape(self.beta) != (7,):
            raise ValueError("expected 7 coefficients")

    def __call__(self, x):
        acc = self.beta[0]
        for b in self.beta[1:]:
            acc = acc * x + b
        return acc


def primer_direction(lam: np.ndarray, b_mat: np.ndarray) -> np.ndarray:
    """Optimal thrust direction: unit vector opposing lam^T B.

    Raises:
        ValueError: when ||lam^T B|| vanishes (direction undefined; the
            caller must treat the point as coasting).
    """
    lam = np.asarray(lam, dtype=float)
    bt = np.asarray(b_mat, dtype=float).T @ lam[: b_mat.shape[0]]
    n = np.linalg.norm(bt)
    if n == 0.0:
        raise ValueError("primer direction undefined: ||lam^T B|| = 0")
    return -bt / n


def switching_value(p, f, fg, h, k, L, lam, m, c, mu=1.0):
    """Reduced switching function S; dtype-generic, vectorized in L."""
    from .dynamics_core import _NORM_GUARD
    bR, bT, bN = btlam(p, f, fg, h, k, L, lam, mu)
    bnorm = sqrt(bR * bR + bT * bT + bN * bN + _NORM_GUARD)
    return 1.0 - lam[8] - (c / m) * bnorm


def switching_function(x: EquinoctialState, lam: Costate,
                       eng: EngineParams, mu: float = 1.0) -> float:
    """S at the state's own longitude (thrust when negative)."""
    return float(switching_value(x.p, x.f, x.g, x.h, x.k, x.L,
                                 lam.as_array(), x.m, eng.c, mu))


# -- switching polynomial assembly ---------------------------------------

_N_SAMPLES = 16
_SAMPLE_L = -math.pi + 2.0 * math.pi * np.arange(_N_SAMPLES) / _N_SAMPLES


def _build_coeff_matrix() -> np.ndarray:
    # Fourier projection: samples -> [a0, a1..a4, b1..b4]
    proj = np.zeros((9, _N_SAMPLES))
    proj[0, :] = 1.0 / _N_SAMPLES
    for d in range(1, 5):
        proj[d, :] = 2.0 / _N_SAMPLES * np.cos(d * _SAMPLE_L)
        proj[4 + d, :] = 2.0 / _N_SAMPLES * np.sin(d * _SAMPLE_L)

    # harmonic -> degree-8 polynomial in x = tan(L/2), descending coeffs
    upoly = np.array([1.0, 0.0, 1.0])  # 1 + x^2
    upow = [np.array([1.0])]
    for _ in range(4):
        upow.append(np.polymul(upow[-1], upoly))

    def pad(c):
        return np.pad(c, (9 - len(c), 0))

    basis = np.zeros((9, 9))
    basis[:, 0] = pad(upow[4])
    for d in range(1, 5):
        asc_re = [(-1) ** (j // 2) * comb(2 * d, j) if j % 2 == 0 else 0.0
                  for j in range(2 * d + 1)]
        asc_im = [(-1) ** ((j - 1) // 2) * comb(2 * d, j) if j % 2 == 1 else 0.0
                  for j in range(2 * d + 1)]
        cd = np.array(asc_re[::-1], dtype=float)
        sd = np.array(asc_im[::-1], dtype=float)
        basis[:, d] = pad(np.polymul(cd, upow[4 - d]))
        basis[:, 4 + d] = pad(np.polymul(sd, upow[4 - d]))

    # exact deflation by (x^2 + 1): q(9,) -> quotient(7,), also linear
    deflate = np.zeros((7, 9))
    for i in range(7):
        for j in range(i % 2, i + 1, 2):
            deflate[i, j] = (-1.0) ** ((i - j) // 2)
    # scale matches the tabulated beta convention
    return -4.0 * deflate @ basis @ proj


_COEFF_MATRIX = _build_coeff_matrix()


def switching_poly_coeffs(p, f, fg, h, k, lam, m, c, mu=1.0) -> SwitchingPolynomial:
    """Exact beta_1..beta_7 of the switching polynomial at a frozen state."""
    lam = np.asarray(value(lam), dtype=float)
    ls = _SAMPLE_L
    bR, bT, bN = btlam(p, f, fg, h, k, ls, lam, mu)
    cL, sL = np.cos(ls), np.sin(ls)
    w = 1.0 + f * cL + fg * sL
    gsamp = mu * w * w * (c * c * (bR * bR + bT * bT + bN * bN)
                          - m * m * (1.0 - lam[8]) ** 2)
    return SwitchingPolynomial(beta=_COEFF_MATRIX @ gsamp)


def switching_poly(x: EquinoctialState, lam: Costate, eng: EngineParams,
                   mu: float = 1.0) -> SwitchingPolynomial:
    return switching_poly_coeffs(x.p, x.f, x.g, x.h, x.k, lam.as_array(),
                                 x.m, eng.c, mu)


def switching_roots(sp: SwitchingPolynomial, s_of_l,
                    validate_tol: float = 1e-8,
                    merge_tol: float = 1e-9,
                    imag_tol: float = 1e-7) -> np.ndarray:
    """Real roots of the switching polynomial, mapped to L in (-pi, pi].

    Args:
        sp: polynomial coefficients.
        s_of_l: callable evaluating the true switching function S(L);
            every polynomial root is re-validated against it so that
            spurious roots introduced by squaring are discarded.

    Returns:
        Sorted longitudes (at most 6).  A root at L = pi shows up as a
        vanishing leading coefficient (tan(L/2) -> inf) and is appended
        explicitly when S(pi) confirms it.

    Raises:
        ValueError: if all coefficients vanish.
    """
    beta = np.asarray(sp.beta, dtype=float)
    bmax = np.max(np.abs(beta))
    if bmax == 0.0:
        raise ValueError("degenerate switching polynomial (all-zero)")
    coeffs = beta.copy()
    had_deflation = False
    while len(coeffs) > 1 and abs(coeffs[0]) < 1e-14 * bmax:
        coeffs = coeffs[1:]
        had_deflation = True
    if len(coeffs) <= 1:
        return np.empty(0)

    cand = [2.0 * math.atan(xr.real) for xr in np.roots(coeffs)
            if abs(xr.imag) <= imag_tol * (1.0 + abs(xr.real))]
    if had_deflation:
        cand.append(math.pi)
    if not cand:
        return np.empty(0)

    ls = np.asarray(cand, dtype=float)
    sval = np.asarray(s_of_l(ls), dtype=float)
    # validation scale: S = 1 - lam_m - (c/m)||b||, so |S - 1| is a cheap
    # proxy for the magnitudes squared away by the polynomial form
    keep = np.abs(sval) <= validate_tol * (1.0 + np.abs(sval - 1.0))
    ls = ls[keep]
    if ls.size == 0:
        return np.empty(0)
    h_ = 1e-7
    for _ in range(2):  # light float polish on S itself
        ds = (np.asarray(s_of_l(ls + h_)) - np.asarray(s_of_l(ls - h_))) / (2 * h_)
        tiny = np.abs(ds) < 1e-13
        ls = ls - np.where(tiny, 0.0, np.asarray(s_of_l(ls)) / np.where(tiny, 1.0, ds))

    roots = sorted(float(wrap_angle(L)) for L in ls)
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) < merge_tol:
            continue
        merged.append(r)
    # wrap-around duplicate (pi vs -pi)
    if len(merged) >= 2 and (merged[-1] - merged[0]) > 2.0 * math.pi - merge_tol:
        merged.pop()
    return np.asarray(merged[:6])


def hamiltonian(x: EquinoctialState, lam: Costate, eng: EngineParams,
                sigma: float, ke: float, gamma=None, mu: float = 1.0) -> float:
    """H in the primer-substituted form at given sigma, k_e, and gamma."""
    from .dynamics_core import hamiltonian_point
    lam_arr = lam.as_array()
    thrust = eng.t_min + (eng.t_max - eng.t_min) * ke * sigma
    return float(hamiltonian_point(
        x.p, x.f, x.g, x.h, x.k, x.L, lam_arr, x.m, x.alpha,
        thrust, eng.c, gamma=gamma, mu=mu))
