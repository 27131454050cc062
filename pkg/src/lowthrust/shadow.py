"""Sun position models, conical-shadow eclipse function, and eclipse roots.

The eclipse criterion is the conical-shadow angular test

    E = Theta_S + Theta_E - Psi,

negative when the spacecraft is sunlit and positive when any part of the
solar disk is occulted (umbra, penumbra, and antumbra all count as
shadowed; the engine shuts off in all three).  Within one averaging
revolution the Sun is frozen at the state's epoch.

Sun models are pluggable: a low-precision analytic almanac series (mean
ecliptic solar position, differentiable in time) or a tabulated
geocentric ephemeris loaded from CSV with cubic interpolation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import generic as g
from .elements import position_vec, position_velocity, wrap_angle
from .generic import arccos, arcsin, cos, dot3, norm3, sin, sqrt, value
from .units import AU_KM, CanonicalUnits, EARTH_UNITS

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class ShadowConfig:
    """Geometry and regularization settings for the shadow model.

    ``ke_poly_cubic`` are the coefficients (descending powers) of the
    inner cubic q(dL); the regularized in-eclipse thrust floor is
    (q(dL)/q(0))^4, pinned to 1 at dL = 0 and 0 at dL = dl_star.
    """

    r_sun_km: float = 696000.0
    r_earth_km: float = 6378.0
    dl_star: float = 0.08
    ke_poly_cubic: tuple = (15625.0, -1875.0, 0.0, 4.0)
    units: CanonicalUnits = EARTH_UNITS

    def __post_init__(self) -> None:
        if not self.r_sun_km > self.r_earth_km > 0:
            raise ValueError("need r_sun_km > r_earth_km > 0")
        if self.dl_star <= 0:
            raise ValueError("dl_star must be positive")

    @property
    def r_sun_du(self) -> float:
        return self.r_sun_km / self.units.du_km

    @property
    def r_earth_du(self) -> float:
        return self.r_earth_km / self.units.du_km


class SunEphemeris:
    """Geocentric Sun position in DU as a function of epoch time.

    Analytic mode evaluates a low-precision almanac series (mean
    equator/equinox frame, good to ~0.01 deg) and is dtype-generic in
    time, which the costate dynamics require.  Tabulated mode cubically
    interpolates an externally supplied geocentric table; queries must
    stay inside the table span.
    """

    def __init__(self, epoch_et: float, mode: str = "analytic",
                 table: Optional[Sequence] = None,
                 units: CanonicalUnits = EARTH_UNITS,
                 frame: str = "eme2000"):
        if mode not in ("analytic", "tabulated"):
            raise ValueError(f"unknown ephemeris mode {mode!r}")
        self.epoch_et = float(epoch_et)
        self.mode = mode
        self.units = units
        self.frame = frame
        self._spline = None
        if mode == "tabulated":
            if table is None:
                raise ValueError("tabulated mode requires a table")
            times = np.asarray([row[0] for row in table], dtype=float)
            pos = np.asarray([row[1] for row in table], dtype=float)
            if times.ndim != 1 or len(times) < 4:
                raise ValueError("table needs at least 4 epochs")
            if np.any(np.diff(times) <= 0):
                raise ValueError("table epochs must be strictly increasing")
            from scipy.interpolate import CubicSpline
            self._t_nodes = times
            self._spline = CubicSpline(times, pos, axis=0)

    @classmethod
    def from_csv(cls, path, epoch_et: float,
                 units: CanonicalUnits = EARTH_UNITS) -> "SunEphemeris":
        """Load `t_et_s,x_km,y_km,z_km` rows into a tabulated ephemeris."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                rows.append((float(rec["t_et_s"]),
                             (float(rec["x_km"]), float(rec["y_km"]),
                              float(rec["z_km"]))))
        return cls(epoch_et=epoch_et, mode="tabulated", table=rows, units=units)

    def position_du(self, t_tu):
        """Sun position (x, y, z) in DU at epoch_et + t_tu * TU."""
        t_et = self.epoch_et + t_tu * self.units.tu_s
        if self.mode == "analytic":
            return self._analytic_km(t_et, 1.0 / self.units.du_km)
        tv = value(t_et)
        if np.any(tv < self._t_nodes[0]) or np.any(tv > self._t_nodes[-1]):
            raise ValueError("tabulated ephemeris query outside table span")
        return self._interp_km(t_et, tv)

    def _analytic_km(self, t_et, scale):
        d = t_et / 86400.0
        lmean = (280.460 + 0.9856474 * d) * _DEG
        ganom = (357.528 + 0.9856003 * d) * _DEG
        lam = lmean + (1.915 * _DEG) * sin(ganom) + (0.020 * _DEG) * sin(2.0 * ganom)
        dist = (1.00014 - 0.01671 * cos(ganom) - 0.00014 * cos(2.0 * ganom)) * AU_KM
        eps = (23.439 - 4.0e-7 * d) * _DEG
        x = dist * cos(lam)
        y = dist * cos(eps) * sin(lam)
        z = dist * sin(eps) * sin(lam)
        return x * scale, y * scale, z * scale

    def _interp_km(self, t_et, tv):
        # generic-dtype cubic evaluation from precomputed spline pieces
        idx = np.clip(np.searchsorted(self._t_nodes, tv, side="right") - 1,
                      0, len(self._t_nodes) - 2)
        cco = self._spline.c[:, idx, :]  # (4, ..., 3)
        dt = t_et - self._t_nodes[idx]
        out = []
        for j in range(3):
            acc = cco[0, ..., j]
            for a in range(1, 4):
                acc = acc * dt + cco[a, ..., j]
            out.append(acc / self.units.du_km)
        return tuple(out)


def eclipse_function(r_sun, r, cfg: ShadowConfig):
    """Conical-shadow angle E; E < 0 sunlit, E > 0 shadowed.

    Args:
        r_sun: Sun position triple (DU).
        r: spacecraft position triple (DU).
        cfg: shadow geometry.
    """
    rmag = norm3(r)
    if np.any(np.asarray(value(rmag)).real <= cfg.r_earth_du):
        raise ValueError("spacecraft position below the occluding surface")
    d = (r_sun[0] - r[0], r_sun[1] - r[1], r_sun[2] - r[2])
    dmag = norm3(d)
    theta_s = arcsin(cfg.r_sun_du / dmag)
    theta_e = arcsin(cfg.r_earth_du / rmag)
    psi = arccos(-dot3(r, d) / (rmag * dmag))
    return theta_s + theta_e - psi


def eclipse_at_longitude(L, p, f, fg, h, k, r_sun, cfg: ShadowConfig):
    """E(L) with all non-longitude variables held fixed."""
    rr = position_vec(p, f, fg, h, k, L)
    return eclipse_function(r_sun, rr, cfg)


def ke_discontinuous(e_val):
    """Hard eclipse gate: 1 sunlit (E < 0), 0 shadowed; ties resolve to 1."""
    return np.where(np.asarray(e_val) <= 0.0, 1.0, 0.0)


def ke_regularized(dl, cfg: ShadowConfig):
    """Minimum normalized thrust inside a shrinking eclipse arc.

    Quartic-of-cubic floor: 1 at dl = 0, 0 at and beyond dl_star,
    strictly decreasing between (the inner cubic has critical points
    only at the endpoints).  Dtype-generic for dl < dl_star; the
    >= dl_star branch must be selected by the caller on float values.
    """
    c3, c2, c1, c0 = cfg.ke_poly_cubic
    q = ((c3 * dl + c2) * dl + c1) * dl + c0
    q = q / cfg.ke_poly_cubic[3]
    q2 = q * q
    out = q2 * q2
    dlv = np.asarray(value(dl)).real
    if isinstance(dl, (float, int)) or dlv.ndim == 0:
        return out if dlv < cfg.dl_star else 0.0 * out
    return g.where(dlv < cfg.dl_star, out, 0.0 * out)


@dataclass
class EclipseRoots:
    """Entry/exit longitudes of the shadowed interval over one period."""

    entry: Optional[float]  # E crosses - -> + (into shadow)
    exit: Optional[float]   # E crosses + -> -
    tangent: bool = False

    @property
    def count(self) -> int:
        return 0 if self.entry is None else 2

    def width(self) -> float:
        if self.entry is None:
            return 0.0
        return (self.exit - self.entry) % (2.0 * math.pi)


def _cylindrical_guesses(p, f, fg, h, k, r_sun, cfg):
    """Seed longitudes from the cylindrical-shadow picture.

    The shadow is centered near the antisolar longitude; its half-width
    for a cylinder of radius R_E at orbital radius r is asin(R_E/r).
    """
    sun_hat = np.asarray(r_sun, dtype=float)
    sun_hat = sun_hat / np.linalg.norm(sun_hat)
    grid = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    rx, ry, rz = (np.asarray(c) for c in position_vec(p, f, fg, h, k, grid))
    proj = rx * sun_hat[0] + ry * sun_hat[1] + rz * sun_hat[2]
    i0 = int(np.argmin(proj))  # most antisolar sample
    l_anti = grid[i0]
    rmag = math.sqrt(rx[i0] ** 2 + ry[i0] ** 2 + rz[i0] ** 2)
    half = math.asin(min(1.0, cfg.r_earth_du / rmag))
    return l_anti - half, l_anti + half


def _bracketed_newton(e_of, de_of, a, b, fa, fb, tol, max_iter):
    """Newton from the bracket midpoint, bisection-safeguarded."""
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        fx = float(e_of(x))
        if fx == 0.0:
            return x
        if fa * fx < 0.0:
            b = x
        else:
            a, fa = x, fx
        dv = float(de_of(x))
        x_new = x - fx / dv if dv != 0.0 else 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) < tol and abs(b - a) < 64.0 * tol:
            return x_new
        x = x_new
    return x


def eclipse_roots(p, f, fg, h, k, r_sun, cfg: ShadowConfig,
                  newton_tol: float = 1e-12, max_iter: int = 80,
                  grid_n: int = 2048, tangency_tol: float = 1e-8,
                  coarse_n: int = 64) -> EclipseRoots:
    """Roots of E(L) = 0 over one revolution, non-L variables frozen.

    A coarse scan of E (seeded around the cylindrical-shadow picture)
    brackets the crossings; safeguarded Newton polishes each to
    ``newton_tol``.  Eclipses narrower than the coarse spacing are
    caught by refining around the scan maximum whenever E gets close to
    zero without crossing.  A dense grid scan with bisection remains as
    the last-resort fallback for inconsistent sign patterns.  Tangent
    geometry (|dE/dL| below tolerance at a root) is reported as no
    eclipse: the subtended arc is below resolution.
    """

    def e_of(L):
        return np.asarray(value(
            eclipse_at_longitude(L, p, f, fg, h, k, r_sun, cfg)))

    def de_of(L, hstep=1e-6):
        return (e_of(L + hstep) - e_of(L - hstep)) / (2.0 * hstep)

    grid = np.linspace(-math.pi, math.pi, coarse_n + 1)
    ev = e_of(grid)
    emax = float(np.max(ev))

    brackets = []
    sign_change = ev[:-1] * ev[1:] < 0.0
    for i in np.nonzero(sign_change)[0]:
        brackets.append((grid[i], grid[i + 1], ev[i], ev[i + 1]))

    if not brackets and emax > -0.05:
        # possible eclipse narrower than the scan spacing: refine twice
        # around the maximum before concluding there is no crossing
        fine, ef = grid, ev
        for _ in range(2):
            i0 = int(np.argmax(ef))
            lo = fine[max(0, i0 - 1)]
            hi = fine[min(len(fine) - 1, i0 + 1)]
            fine = np.linspace(lo, hi, 65)
            ef = e_of(fine)
            for i in np.nonzero(ef[:-1] * ef[1:] < 0.0)[0]:
                brackets.append((fine[i], fine[i + 1], ef[i], ef[i + 1]))
            if brackets:
                break

    if not brackets:
        return EclipseRoots(None, None)

    if len(brackets) != 2:
        roots = _grid_roots(e_of, grid_n, newton_tol)
        if len(roots) < 2:
            return EclipseRoots(None, None)
        roots = roots[:2]
    else:
        roots = [_bracketed_newton(e_of, de_of, a, b, fa, fb,
                                   newton_tol, max_iter)
                 for a, b, fa, fb in brackets]

    end_slopes = de_of(np.asarray(roots))
    if np.min(np.abs(end_slopes)) < tangency_tol:
        return EclipseRoots(None, None, tangent=True)
    if end_slopes[0] > 0.0:
        r_in, r_out = roots[0], roots[1]
    else:
        r_in, r_out = roots[1], roots[0]
    return EclipseRoots(entry=float(wrap_angle(r_in)),
                        exit=float(wrap_angle(r_out)))


def _grid_roots(e_of, n, tol):
    grid = np.linspace(-math.pi, math.pi, n + 1)
    ev = e_of(grid)
    roots = []
    for i in range(n):
        if ev[i] == 0.0:
            roots.append(grid[i])
        elif ev[i] * ev[i + 1] < 0.0:
            a, b = grid[i], grid[i + 1]
            fa = ev[i]
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = float(e_of(mid))
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < tol:
                    break
            roots.append(0.5 * (a + b))
    return [float(wrap_angle(r)) for r in roots]
