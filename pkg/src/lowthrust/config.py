"""Transfer configuration: dataclass + line-oriented config file parser.

File format: UTF-8 text, one `key = value` per line, `#` comments.
Keys carry explicit units.  Unknown keys are rejected (typo safety).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .averaging import AveragedParams, AveragingConfig
from .control import EngineParams
from .dynamics_core import J2Config
from .elements import KeplerianElements, kepler_to_equinoctial
from .shadow import ShadowConfig, SunEphemeris
from .smooth import SmoothingParams, UnaveragedParams
from .units import CanonicalUnits


@dataclass
class TransferConfig:
    """Complete description of one boundary-value transfer problem."""

    # epoch and duration
    epoch_et_s: float = 260280065.0
    tof_days: float = 30.0
    # engine
    thrust_max_n: float = 0.2
    thrust_min_n: float = 0.0
    isp_s: float = 3100.0
    mass0_kg: float = 100.0
    # perturbation
    j2_enabled: bool = True
    j2_value: float = 0.00108263
    # boundary orbits (degrees for angles, km for lengths)
    initial_a_km: float = 24505.0
    initial_e: float = 0.725
    initial_i_deg: float = 28.5
    initial_aop_deg: float = 0.0
    initial_raan_deg: float = 0.0
    initial_ta_deg: float = 0.0
    target_a_km: float = 42165.0
    target_e: float = 0.0
    target_i_deg: float = 0.0
    target_aop_deg: float = 0.0
    target_raan_deg: float = 0.0
    # transversality switches
    free_final_mass: bool = True
    free_final_longitude: bool = True
    # model selection
    model: str = "averaged"            # averaged | unaveraged
    q: int = 6
    dl_star_rad: float = 0.08
    regularize_eclipse: bool = True
    eps_e: float = 3.0e-5
    eps_s: float = 1.0e-5
    # integration
    rel_tol: float = 1e-13
    abs_tol: float = 1e-13
    solver_rel_tol: float = 1e-10
    solver_abs_tol: float = 1e-10
    # solver
    solver_tol_z: float = 1e-10
    solver_max_iter: int = 60
    free_lambda_L: bool = False
    free_lambda_t: bool = False
    free_lambda_alpha: bool = False
    lambda0: tuple = (0.0,) * 9
    # environment
    du_km: float = 6378.0
    mu_km3s2: float = 398600.0
    sun_radius_km: float = 696000.0
    earth_radius_km: float = 6378.0
    ephemeris: str = "analytic"        # analytic | path to CSV table

    def __post_init__(self) -> None:
        if self.tof_days <= 0:
            raise ValueError("tof_days must be positive")
        if self.model not in ("averaged", "unaveraged"):
            raise ValueError(f"unknown model {self.model!r}")
        if len(self.lambda0) != 9:
            raise ValueError("lambda0 must have 9 entries")

    # -- derived canonical objects --------------------------------------
    @property
    def units(self) -> CanonicalUnits:
        return CanonicalUnits(du_km=self.du_km, mu_km3s2=self.mu_km3s2)

    @property
    def alpha_tu(self) -> float:
        return self.tof_days * 86400.0 / self.units.tu_s

    def engine(self) -> EngineParams:
        return EngineParams(t_max_n=self.thrust_max_n,
                            t_min_n=self.thrust_min_n,
                            isp_s=self.isp_s, units=self.units)

    def shadow(self) -> ShadowConfig:
        return ShadowConfig(r_sun_km=self.sun_radius_km,
                            r_earth_km=self.earth_radius_km,
                            dl_star=self.dl_star_rad, units=self.units)

    def sun(self) -> SunEphemeris:
        if self.ephemeris == "analytic":
            return SunEphemeris(epoch_et=self.epoch_et_s, units=self.units)
        return SunEphemeris.from_csv(self.ephemeris, epoch_et=self.epoch_et_s,
                                     units=self.units)

    def j2(self) -> J2Config:
        return J2Config(enabled=self.j2_enabled, j2=self.j2_value,
                        re_du=self.earth_radius_km / self.du_km)

    def averaged_params(self, q: Optional[int] = None,
                        regularize: Optional[bool] = None) -> AveragedParams:
        acfg = AveragingConfig(
            q=q if q is not None else self.q,
            dl_star=self.dl_star_rad,
            regularize=self.regularize_eclipse if regularize is None else regularize)
        return AveragedParams(engine=self.engine(), ephemeris=self.sun(),
                              shadow=self.shadow(), averaging=acfg,
                              j2=self.j2())

    def unaveraged_params(self) -> UnaveragedParams:
        return UnaveragedParams(engine=self.engine(),
                                smoothing=SmoothingParams(eps_e=self.eps_e,
                                                          eps_s=self.eps_s),
                                ephemeris=self.sun(), shadow=self.shadow(),
                                j2=self.j2())

    def initial_kep(self) -> KeplerianElements:
        return KeplerianElements(
            a=self.initial_a_km / self.du_km, e=self.initial_e,
            inc=math.radians(self.initial_i_deg),
            aop=math.radians(self.initial_aop_deg),
            raan=math.radians(self.initial_raan_deg),
            ta=math.radians(self.initial_ta_deg))

    def target_equinoctial(self) -> np.ndarray:
        """Target (p, f, g, h, k) in canonical units."""
        kep = KeplerianElements(
            a=self.target_a_km / self.du_km, e=self.target_e,
            inc=math.radians(self.target_i_deg),
            aop=math.radians(self.target_aop_deg),
            raan=math.radians(self.target_raan_deg), ta=0.0)
        x = kepler_to_equinoctial(kep)
        return np.array([x.p, x.f, x.g, x.h, x.k])

    def initial_state(self) -> np.ndarray:
        """Augmented initial state (9,) in canonical units."""
        x0 = kepler_to_equinoctial(self.initial_kep(), t=0.0,
                                   alpha=self.alpha_tu, m=self.mass0_kg)
        return x0.as_array()

    def initial_y(self, lam0=None) -> np.ndarray:
        lam = np.asarray(self.lambda0 if lam0 is None else lam0, dtype=float)
        return np.concatenate([self.initial_state(), lam])


_BOOL_TRUE = {"true", "yes", "on", "1"}
_BOOL_FALSE = {"false", "no", "off", "0"}


def parse_config(path) -> TransferConfig:
    """Parse a `key = value` config file into a TransferConfig.

    Raises:
        ValueError: unknown keys, bad values, or malformed lines.
    """
    raw = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ValueError(f"{path}:{lineno}: empty key")
        raw[key] = val

    kwargs = {}
    by_name = {f.name: f for f in fields(TransferConfig)}
    for key, val in raw.items():
        if key not in by_name:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = _convert(by_name[key], val, key)
    return TransferConfig(**kwargs)


def _convert(fld, val: str, key: str):
    ftype = fld.type
    if ftype == "bool":
        low = val.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"{key}: expected boolean, got {val!r}")
    if ftype == "int":
        return int(val)
    if ftype == "float":
        return float(val)
    if ftype == "tuple":
        parts = [p for p in val.replace(",", " ").split() if p]
        return tuple(float(p) for p in parts)
    return val


def write_config(cfg: TransferConfig, path) -> None:
    lines = []
    for f in fields(TransferConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        lines.append(f"{f.name} = {v}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
