import math

import numpy as np
import pytest

from lowthrust.rk import IntegratorConfig, integrate
from lowthrust.smooth import (SmoothingParams, ke_smooth, sigma_smooth,
                              unaveraged_hamiltonian, unaveraged_rhs)
from lowthrust.dynamics_core import J2Config
from lowthrust.control import EngineParams
from lowthrust.smooth import UnaveragedParams

from conftest import random_costate, random_elliptic_state
from lowthrust.elements import kepler_to_equinoctial


class TestSigmoids:
    def test_midpoint_values(self):
        assert float(ke_smooth(0.0, 3e-5)) == 0.5
        assert float(sigma_smooth(0.0, 1e-5)) == 0.5

    def test_closed_form_at_ten_widths(self):
        eps = 3e-5
        # 0.5 (1 + 10/sqrt(101)) evaluated in closed form
        expected = 0.5 * (1.0 + 10.0 / math.sqrt(101.0))
        assert float(ke_smooth(-10 * eps, eps)) == pytest.approx(expected,
                                                                 rel=1e-15)
        assert expected == pytest.approx(0.99751, abs=5e-6)

    def test_antisymmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            s = rng.normal()
            assert float(sigma_smooth(-s, 1e-3)) == pytest.approx(
                1.0 - float(sigma_smooth(s, 1e-3)), abs=1e-15)
            assert float(ke_smooth(-s, 1e-3)) == pytest.approx(
                1.0 - float(ke_smooth(s, 1e-3)), abs=1e-15)

    def test_bang_bang_limit(self):
        rng = np.random.default_rng(2)
        svals = rng.uniform(-2, 2, size=200)
        svals = svals[np.abs(svals) > 1e-3]
        for eps in (1e-6, 1e-8):
            sig = np.array([float(sigma_smooth(s, eps)) for s in svals])
            hard = (svals < 0).astype(float)
            assert np.max(np.abs(sig - hard)) < 1e-3

    def test_validation(self):
        with pytest.raises(ValueError):
            SmoothingParams(eps_e=0.0)


class TestUnaveragedRhs:
    def test_ballistic_keplerian(self, unavg_params, gto_state):
        from dataclasses import replace
        eng0 = EngineParams(t_max_n=1e-300, t_min_n=0.0, isp_s=3100.0)
        params = replace(unavg_params, engine=eng0,
                         j2=J2Config(enabled=False))
        y0 = np.concatenate([gto_state.as_array(), np.zeros(9)])
        r = unaveraged_rhs(y0, params)
        w = gto_state.w
        assert np.allclose(r[:5], 0.0, atol=1e-250)
        assert r[5] == pytest.approx(
            gto_state.alpha * math.sqrt(gto_state.p) * (w / gto_state.p)**2,
            rel=1e-13)
        assert r[6] == pytest.approx(gto_state.alpha, rel=1e-15)
        assert r[7] == 0.0
        assert r[8] == pytest.approx(0.0, abs=1e-250)

    def test_costate_rates_match_hamiltonian_gradient(self, unavg_params):
        rng = np.random.default_rng(9)
        h = 1e-6
        worst = 0.0
        for _ in range(100):
            kep = random_elliptic_state(rng, e_max=0.75, i_max_deg=60.0)
            x = kepler_to_equinoctial(kep, t=float(rng.uniform(0, 4000)),
                                      alpha=3212.75,
                                      m=float(rng.uniform(50, 150)))
            if x.p / (1 + x.ecc) < 1.05:
                continue
            lam = random_costate(rng)
            y0 = np.concatenate([x.as_array(), lam])
            r = unaveraged_rhs(y0, unavg_params)
            for i in rng.choice(18, size=6, replace=False):
                yp = y0.copy(); yp[i] += h
                ym = y0.copy(); ym[i] -= h
                d = (unaveraged_hamiltonian(yp, unavg_params)
                     - unaveraged_hamiltonian(ym, unavg_params)) / (2 * h)
                tgt = r[9 + i] if i < 9 else -r[i - 9]
                tgt = -tgt if i < 9 else tgt
                # lamdot_i = -dH/dx_i ; xdot_i = +dH/dlam_i
                if i < 9:
                    err = abs(-d - r[9 + i]) / (1 + abs(d))
                else:
                    err = abs(d - r[i - 9]) / (1 + abs(d))
                worst = max(worst, err)
        assert worst < 1e-6

    def test_mass_never_increases(self, unavg_params):
        rng = np.random.default_rng(19)
        for _ in range(200):
            kep = random_elliptic_state(rng, e_max=0.75)
            x = kepler_to_equinoctial(kep, alpha=3000.0, m=100.0)
            if x.p / (1 + x.ecc) < 1.05:
                continue
            lam = random_costate(rng)
            y0 = np.concatenate([x.as_array(), lam])
            r = unaveraged_rhs(y0, unavg_params)
            assert r[8] <= 0.0

    def test_hamiltonian_conserved_short_span(self, unavg_params, gto_y0):
        h0 = unaveraged_hamiltonian(gto_y0, unavg_params)
        traj = integrate(lambda _t, y: unaveraged_rhs(y, unavg_params),
                         gto_y0, (0.0, 0.02),
                         IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12))
        hf = unaveraged_hamiltonian(traj.y_final, unavg_params)
        assert abs(hf - h0) / abs(h0) < 1e-10
