"""Element sets, conversions, Gauss variational matrices, and J2.

Component-level functions (``gauss_ab``, ``btlam``, ``position_rtn_accel_j2``
and friends) are dtype-generic: they accept floats, numpy arrays, complex
values or :class:`~lowthrust.generic.Dual` jets, and vectorize over a
trailing node/batch axis.  The dataclass wrappers provide the validated
user-facing API in canonical units (DU/TU/kg, mu = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import generic as g
from .generic import cos, sin, sqrt


@dataclass(frozen=True)
class KeplerianElements:
    """Classical elements; lengths in DU, angles in rad."""

    a: float
    e: float
    inc: float
    aop: float
    raan: float
    ta: float
    degenerate_aop_raan: bool = False

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"semimajor axis must be positive, got {self.a}")
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"only elliptic orbits supported, e={self.e}")
        if abs(self.inc - math.pi) < 1e-12:
            raise ValueError("i = pi is singular for equinoctial elements")


@dataclass
class EquinoctialState:
    """Augmented state [p, f, g, h, k, L, t, alpha, m].

    p in DU, angles in rad, t and alpha in TU, m in kg.
    """

    p: float
    f: float
    g: float
    h: float
    k: float
    L: float
    t: float = 0.0
    alpha: float = 1.0
    m: float = 1.0

    def __post_init__(self) -> None:
        if self.p <= 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.m <= 0 or self.alpha <= 0:
            raise ValueError("mass and time-of-flight must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.f, self.g, self.h, self.k,
                         self.L, self.t, self.alpha, self.m])

    @classmethod
    def from_array(cls, x) -> "EquinoctialState":
        return cls(*[float(v) for v in x])

    @property
    def w(self):
        return 1.0 + self.f * math.cos(self.L) + self.g * math.sin(self.L)

    @property
    def ecc(self):
        return math.hypot(self.f, self.g)


@dataclass
class Costate:
    """Adjoint variables paired with :class:`EquinoctialState`."""

    lam_p: float = 0.0
    lam_f: float = 0.0
    lam_g: float = 0.0
    lam_h: float = 0.0
    lam_k: float = 0.0
    lam_L: float = 0.0
    lam_t: float = 0.0
    lam_alpha: float = 0.0
    lam_m: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.lam_p, self.lam_f, self.lam_g, self.lam_h,
                         self.lam_k, self.lam_L, self.lam_t,
                         self.lam_alpha, self.lam_m])

    @classmethod
    def from_array(cls, lam) -> "Costate":
        return cls(*[float(v) for v in lam])


@dataclass(frozen=True)
class GaussMatrices:
    """Drift vector A (8,) and control influence B (8, 3) in RTN."""

    a_vec: np.ndarray
    b_mat: np.ndarray


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    y = (-x + math.pi) % (2.0 * math.pi)
    return -(y - math.pi)


def kepler_to_equinoctial(kep: KeplerianElements, t: float = 0.0,
                          alpha: float = 1.0, m: float = 1.0) -> EquinoctialState:
    """Classical -> modified equinoctial elements.

    Raises:
        ValueError: for e >= 1 or i = pi (retrograde singularity).
    """
    lonper = kep.aop + kep.raan
    ti = math.tan(kep.inc / 2.0)
    return EquinoctialState(
        p=kep.a * (1.0 - kep.e**2),
        f=kep.e * math.cos(lonper),
        g=kep.e * math.sin(lonper),
        h=ti * math.cos(kep.raan),
        k=ti * math.sin(kep.raan),
        L=float(wrap_angle(kep.ta + lonper)),
        t=t, alpha=alpha, m=m,
    )


def equinoctial_to_keplerian(x: EquinoctialState) -> KeplerianElements:
    """Exact algebraic inverse of :func:`kepler_to_equinoctial`.

    For circular orbits (e = 0) the AOP/RAAN split is undefined; both are
    reported as 0 with ``degenerate_aop_raan`` set.
    """
    e = math.hypot(x.f, x.g)
    a = x.p / (1.0 - e**2)
    th = math.hypot(x.h, x.k)
    inc = 2.0 * math.atan(th)
    degenerate = e < 1e-14
    if degenerate:
        raan = math.atan2(x.k, x.h) if th > 1e-14 else 0.0
        aop = 0.0
        ta = wrap_angle(x.L - raan)
        if th <= 1e-14:
            raan = 0.0
            ta = wrap_angle(x.L)
    else:
        lonper = math.atan2(x.g, x.f)
        raan = math.atan2(x.k, x.h) if th > 1e-14 else 0.0
        aop = wrap_angle(lonper - raan)
        ta = wrap_angle(x.L - lonper)
    return KeplerianElements(a=a, e=e, inc=inc, aop=float(aop),
                             raan=float(raan), ta=float(ta),
                             degenerate_aop_raan=degenerate)


def position_vec(p, f, fg, h, k, L):
    """Inertial position triple only (hot path for eclipse geometry)."""
    cL, sL = cos(L), sin(L)
    w = 1.0 + f * cL + fg * sL
    s2 = 1.0 + h * h + k * k
    a2 = h * h - k * k
    rs = p / (w * s2)
    hk2 = 2.0 * h * k
    rx = rs * (cL + a2 * cL + hk2 * sL)
    ry = rs * (sL - a2 * sL + hk2 * cL)
    rz = 2.0 * rs * (h * sL - k * cL)
    return rx, ry, rz


def position_velocity(p, f, fg, h, k, L, mu=1.0):
    """Equinoctial -> inertial position/velocity as component triples.

    ``fg`` is the g element (named to avoid clashing with the module
    alias).  Dtype-generic and vectorized over trailing axes.
    """
    cL, sL = cos(L), sin(L)
    w = 1.0 + f * cL + fg * sL
    s2 = 1.0 + h * h + k * k
    a2 = h * h - k * k
    r = p / w
    rx = (r / s2) * (cL + a2 * cL + 2.0 * h * k * sL)
    ry = (r / s2) * (sL - a2 * sL + 2.0 * h * k * cL)
    rz = (2.0 * r / s2) * (h * sL - k * cL)
    smup = sqrt(mu / p)
    vx = -(smup / s2) * (sL + a2 * sL - 2.0 * h * k * cL + fg
                         - 2.0 * f * h * k + a2 * fg)
    vy = -(smup / s2) * (-cL + a2 * cL + 2.0 * h * k * sL - f
                         + 2.0 * fg * h * k + a2 * f)
    vz = (2.0 * smup / s2) * (h * cL + k * sL + f * h + fg * k)
    return (rx, ry, rz), (vx, vy, vz)


def equinoctial_to_rv(x: EquinoctialState, mu: float = 1.0):
    """State -> (position DU, velocity DU/TU) as numpy 3-vectors."""
    rr, vv = position_velocity(x.p, x.f, x.g, x.h, x.k, x.L, mu)
    return np.array(rr, dtype=float), np.array(vv, dtype=float)


def gauss_ab(p, f, fg, h, k, L, mu=1.0):
    """Gauss variational equations for the augmented equinoctial state.

    Returns (a_vec, b_rows): the drift 8-vector and the 8 rows of the
    control-influence matrix, each row a (R, T, N) triple.  Rows for the
    two time-like states are identically zero.
    """
    cL, sL = cos(L), sin(L)
    w = 1.0 + f * cL + fg * sL
    s2 = 1.0 + h * h + k * k
    sp = sqrt(p / mu)
    hk = h * sL - k * cL
    zero = 0.0 * w

    a_vec = (zero, zero, zero, zero, zero,
             sqrt(mu * p) * (w / p) * (w / p), 1.0 + zero, zero)

    b_rows = (
        (zero, sp * 2.0 * p / w, zero),
        (sp * sL, sp * ((w + 1.0) * cL + f) / w, -sp * fg * hk / w),
        (-sp * cL, sp * ((w + 1.0) * sL + fg) / w, sp * f * hk / w),
        (zero, zero, sp * s2 * cL / (2.0 * w)),
        (zero, zero, sp * s2 * sL / (2.0 * w)),
        (zero, zero, sp * hk / w),
        (zero, zero, zero),
        (zero, zero, zero),
    )
    return a_vec, b_rows


def gauss_matrices(x: EquinoctialState, mu: float = 1.0) -> GaussMatrices:
    """Validated float-mode wrapper around :func:`gauss_ab`."""
    if x.w <= 0:
        raise ValueError(f"w = {x.w} <= 0: not an elliptic state")
    a_vec, b_rows = gauss_ab(x.p, x.f, x.g, x.h, x.k, x.L, mu)
    return GaussMatrices(a_vec=np.array(a_vec, dtype=float),
                         b_mat=np.array(b_rows, dtype=float))


def btlam(p, f, fg, h, k, L, lam, mu=1.0):
    """B^T lambda as an RTN component triple.

    ``lam`` is any indexable with the costate ordering
    (lam_p, lam_f, lam_g, lam_h, lam_k, lam_L, ...); only the first six
    enter because the time rows of B vanish.
    """
    cL, sL = cos(L), sin(L)
    w = 1.0 + f * cL + fg * sL
    s2 = 1.0 + h * h + k * k
    sp = sqrt(p / mu)
    hk = h * sL - k * cL
    bR = sp * (lam[1] * sL - lam[2] * cL)
    bT = (sp / w) * (2.0 * p * lam[0]
                     + lam[1] * ((w + 1.0) * cL + f)
                     + lam[2] * ((w + 1.0) * sL + fg))
    bN = (sp / w) * (hk * (lam[2] * f - lam[1] * fg + lam[5])
                     + (s2 / 2.0) * (lam[3] * cL + lam[4] * sL))
    return bR, bT, bN


def j2_accel_rtn(p, f, fg, h, k, L, j2, re, mu=1.0):
    """J2 perturbation in RTN for equinoctial elements.

    Dtype-generic; validated against a Cartesian oblateness oracle
    rotated into RTN.
    """
    cL, sL = cos(L), sin(L)
    w = 1.0 + f * cL + fg * sL
    r = p / w
    s2 = 1.0 + h * h + k * k
    hk = h * sL - k * cL
    fac = mu * j2 * re * re / (r**4)
    gr = -1.5 * fac * (1.0 - 12.0 * hk * hk / (s2 * s2))
    gt = -12.0 * fac * hk * (h * cL + k * sL) / (s2 * s2)
    gn = -6.0 * fac * hk * (1.0 - h * h - k * k) / (s2 * s2)
    return gr, gt, gn


def j2_rtn(x: EquinoctialState, j2: float, re: float, mu: float = 1.0) -> np.ndarray:
    """Float-mode wrapper returning the (R, T, N) acceleration vector."""
    return np.array(j2_accel_rtn(x.p, x.f, x.g, x.h, x.k, x.L, j2, re, mu),
                    dtype=float)


def j2_accel_cartesian(r_vec, j2, re, mu=1.0):
    """Oblateness acceleration in inertial axes (oracle form)."""
    x, y, z = r_vec
    r2 = x * x + y * y + z * z
    r = np.sqrt(r2)
    zr2 = (z / r) ** 2
    c = -1.5 * j2 * mu * re * re / (r2 * r2)
    ax = c * (x / r) * (1.0 - 5.0 * zr2)
    ay = c * (y / r) * (1.0 - 5.0 * zr2)
    az = c * (z / r) * (3.0 - 5.0 * zr2)
    return np.array([ax, ay, az])


def rtn_basis(r_vec, v_vec):
    """Orthonormal (R, T, N) axes from inertial position/velocity."""
    r_vec = np.asarray(r_vec, dtype=float)
    v_vec = np.asarray(v_vec, dtype=float)
    rhat = r_vec / np.linalg.norm(r_vec)
    n = np.cross(r_vec, v_vec)
    nhat = n / np.linalg.norm(n)
    that = np.cross(nhat, rhat)
    return rhat, that, nhat


def mean_motion(p, f, fg, mu=1.0):
    """Mean motion n = sqrt(mu/a^3) from equinoctial elements."""
    one_e2 = 1.0 - f * f - fg * fg
    return sqrt(mu) * one_e2 * sqrt(one_e2) / (p * sqrt(p))
