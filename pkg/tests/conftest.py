import math
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lowthrust.averaging import AveragedParams, AveragingConfig
from lowthrust.control import EngineParams
from lowthrust.dynamics_core import J2Config
from lowthrust.elements import KeplerianElements, kepler_to_equinoctial
from lowthrust.shadow import ShadowConfig, SunEphemeris
from lowthrust.smooth import SmoothingParams, UnaveragedParams
from lowthrust.units import EARTH_UNITS

settings.register_profile(
    "default", max_examples=25, deadline=timedelta(seconds=30),
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GTO_EPOCH_ET = 260280065.0


@pytest.fixture(scope="session")
def units():
    return EARTH_UNITS


@pytest.fixture(scope="session")
def gto_state():
    kep = KeplerianElements(a=24505.0 / 6378.0, e=0.725,
                            inc=math.radians(28.5), aop=0.0, raan=0.0, ta=0.0)
    alpha = 30.0 * 86400.0 / EARTH_UNITS.tu_s
    return kepler_to_equinoctial(kep, t=0.0, alpha=alpha, m=100.0)


@pytest.fixture(scope="session")
def engine():
    return EngineParams(t_max_n=0.2, t_min_n=0.0, isp_s=3100.0)


@pytest.fixture(scope="session")
def sun():
    return SunEphemeris(epoch_et=GTO_EPOCH_ET)


@pytest.fixture(scope="session")
def shadow_cfg():
    return ShadowConfig()


@pytest.fixture(scope="session")
def avg_params(engine, sun, shadow_cfg):
    return AveragedParams(engine=engine, ephemeris=sun, shadow=shadow_cfg,
                          averaging=AveragingConfig(q=6),
                          j2=J2Config(enabled=True))


@pytest.fixture(scope="session")
def unavg_params(engine, sun, shadow_cfg):
    return UnaveragedParams(engine=engine, smoothing=SmoothingParams(),
                            ephemeris=sun, shadow=shadow_cfg,
                            j2=J2Config(enabled=True))


@pytest.fixture(scope="session")
def gto_lambda_avg():
    """Converged averaged costates of the 48-rev reference transfer."""
    return np.array([-2.321725879137949, -9.199452707456160,
                     1.406360623157848, 9.188890978432537,
                     -1.548641252837620, 0.0, 6.312e-12, 0.0,
                     0.074834309858591])


@pytest.fixture(scope="session")
def gto_y0(gto_state, gto_lambda_avg):
    return np.concatenate([gto_state.as_array(), gto_lambda_avg])


def random_elliptic_state(rng, e_max=0.95, i_max_deg=170.0):
    kep = KeplerianElements(
        a=float(rng.uniform(1.05, 8.0)),
        e=float(rng.uniform(0.0, e_max)),
        inc=float(math.radians(rng.uniform(0.0, i_max_deg))),
        aop=float(rng.uniform(-math.pi, math.pi)),
        raan=float(rng.uniform(-math.pi, math.pi)),
        ta=float(rng.uniform(-math.pi, math.pi)),
    )
    return kep


def random_costate(rng, scale=5.0):
    lam = rng.normal(scale=scale, size=9)
    lam[8] = rng.uniform(-0.5, 0.9)
    return lam
