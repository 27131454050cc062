"""Canonical unit system for the transfer problem.

All internal math runs in canonical units: lengths in DU, times in TU
(with TU chosen so the gravitational parameter is exactly 1), masses in
kilograms.  Forces are therefore expressed in kg*DU/TU^2 and velocities
in DU/TU.  I/O boundaries (configs, CSV emission) use km, seconds,
Newtons and kg.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CanonicalUnits:
    """Length/gravity based canonical scaling.

    Attributes:
        du_km: canonical length unit in km.
        mu_km3s2: gravitational parameter in km^3/s^2.
        tu_s: derived time unit, sqrt(du^3/mu), in seconds.
    """

    du_km: float = 6378.0
    mu_km3s2: float = 398600.0
    tu_s: float = field(init=False)

    def __post_init__(self) -> None:
        if self.du_km <= 0 or self.mu_km3s2 <= 0:
            raise ValueError("du_km and mu_km3s2 must be positive")
        object.__setattr__(
            self, "tu_s", math.sqrt(self.du_km**3 / self.mu_km3s2)
        )

    @property
    def vu_kms(self) -> float:
        """Velocity unit DU/TU in km/s."""
        return self.du_km / self.tu_s

    @property
    def accel_ms2(self) -> float:
        """Acceleration unit DU/TU^2 in m/s^2."""
        return 1000.0 * self.du_km / self.tu_s**2

    def km_to_du(self, x_km):
        return x_km / self.du_km

    def du_to_km(self, x_du):
        return x_du * self.du_km

    def s_to_tu(self, t_s):
        return t_s / self.tu_s

    def tu_to_s(self, t_tu):
        return t_tu * self.tu_s

    def thrust_n_to_canonical(self, thrust_n):
        """Newtons -> kg*DU/TU^2 (mass stays in kg)."""
        return thrust_n / self.accel_ms2

    def speed_ms_to_canonical(self, v_ms):
        """m/s -> DU/TU."""
        return v_ms / (1000.0 * self.vu_kms)


EARTH_UNITS = CanonicalUnits()

G0_MS2 = 9.80665
AU_KM = 149_597_870.7
