"""Orbit-averaged minimum-fuel low-thrust trajectory optimization."""

from .units import CanonicalUnits, EARTH_UNITS, G0_MS2
from .elements import (Costate, EquinoctialState, GaussMatrices,
                       KeplerianElements, equinoctial_to_keplerian,
                       equinoctial_to_rv, gauss_matrices, j2_rtn,
                       kepler_to_equinoctial)
from .control import (EngineParams, SwitchingPolynomial, hamiltonian,
                      primer_direction, switching_function, switching_poly,
                      switching_roots)
from .shadow import (ShadowConfig, SunEphemeris, eclipse_function,
                     eclipse_roots, ke_discontinuous, ke_regularized)
from .smooth import SmoothingParams, UnaveragedParams, ke_smooth, \
    sigma_smooth, unaveraged_rhs
from .averaging import (Arc, ArcDecomposition, AveragedParams,
                        AveragingConfig, arc_decomposition, averaged_rhs,
                        gauss_legendre, quadrature_count, singularity_probe)
from .rk import IntegratorConfig, StepUnderflow, Trajectory, integrate

__version__ = "0.1.0"
