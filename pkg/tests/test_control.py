import math

import numpy as np
import pytest

from lowthrust.control import (EngineParams, SwitchingPolynomial, hamiltonian,
                               primer_direction, switching_function,
                               switching_poly_coeffs, switching_roots,
                               switching_value)
from lowthrust.elements import (Costate, EquinoctialState, btlam,
                                gauss_matrices, j2_rtn,
                                kepler_to_equinoctial)

from conftest import random_costate, random_elliptic_state


def tabulated_betas(p, f, g, h, k, lam, m, c, mu=1.0):
    """Printed closed forms of the switching-polynomial coefficients.

    Transcribed verbatim for cross-validation of the matrix-assembled
    production path.  The printed beta_1 entry duplicates beta_7 (a
    transcription slip in the source table); the correct beta_1 equals
    beta_7 with (f, g, h, k, lam_f, lam_g, lam_h, lam_k) negated, which
    is what the L -> L + pi half-turn symmetry of the revolution
    requires.  Returned beta_1 uses that corrected form.
    """
    lp, lf, lg, lh, lk, lL, lm = (lam[0], lam[1], lam[2], lam[3], lam[4],
                                  lam[5], lam[8])

    def beta7(f, g, h, k, lf, lg, lh, lk):
        return (-16*c**2*p**3*lp**2 - 32*lp*(lf*f + 0.5*lg*g + lf)*c**2*p**2
                - 16*((0.25*lg**2 + lf**2 + 0.25*lg**2*k**2)*f**2
                      + (-lg*lh*k**3/4 - lg*(g*lf - lL)*k**2/2
                         - lg*lh*(h**2 + 1)*k/4 + lg**2/2 + 2*lf**2
                         + lf*lg*g)*f
                      + lh**2*k**4/16 + lh*(g*lf - lL)*k**3/4
                      + ((0.125 + h**2/8)*lh**2 + (g*lf - lL)**2/4)*k**2
                      + lh*(h**2 + 1)*(g*lf - lL)*k/4
                      + (h**2 + 1)**2*lh**2/16 + lf**2 + lf*lg*g
                      + lg**2*(g**2 + 1)/4)*c**2*p
                + 4*mu*m**2*(f + 1)**2*(lm - 1)**2)

    b7 = beta7(f, g, h, k, lf, lg, lh, lk)
    b1 = beta7(-f, -g, -h, -k, -lf, -lg, -lh, -lk)

    def beta26(sign):
        # sign=-1 reproduces beta_2, sign=+1 beta_6 (with leading factors)
        fs = sign * 1.0
        core = (-lf*(h*k*lf - lg)*g**2/2
                + (-lf*lh*h**3/4 + lf*lk*h**2*k/4
                   + (-lh*k**2/4 + (f*lg + lL)*k - lh/4)*lf*h
                   + lf*lk*k**3/4 + lf*lk*k/4
                   + (f + fs*1.5)*lg**2 + lf**2*(f + fs))*g
                + lh*lk*h**4/8 + lh*(f*lg + lL)*h**3/4
                - lk*(-lh*k**2 + (f*lg + lL)*k - lh)*h**2/4
                - (f*lg + lL)*(-lh*k**2/2 + (f*lg + lL)*k - lh/2)*h/2
                + lh*lk*k**4/8 - lk*(f*lg + lL)*k**3/4 + lh*lk*k**2/4
                - lk*(f*lg + lL)*k/4 + lf*(f + 3*fs)*(f + fs)*lg/2
                + lh*lk/8)
        if sign < 0:
            return (32*lp*(g*lf + lg*(f - 2))*c**2*p**2 + 32*c**2*core*p
                    - 16*mu*g*m**2*(lm - 1)**2*(f - 1))
        return (-32*lp*(g*lf + lg*(f + 2))*c**2*p**2 - 32*core*c**2*p
                + 16*mu*g*m**2*(lm - 1)**2*(f + 1))

    def beta35(sign):
        common = ((-lh**2/16 + lk**2/4)*h**4 - lk*(-f*lg + g*lf - lL)*h**3
                  + ((lk**2/2 - lh**2/8)*k**2 - lh*(-f*lg + g*lf - lL)*k/4
                     + lg**2*f**2 - 2*lg*(g*lf - lL)*f + lf**2*g**2
                     - 2*lf*lL*g - lh**2/8 + lk**2/2 + lL**2)*h**2
                  - lk*(k**2 + 1)*(-f*lg + g*lf - lL)*h
                  + (-lh**2/16 + lk**2/4)*k**4
                  - lh*(-f*lg + g*lf - lL)*k**3/4
                  + (-lg**2*f**2/4 + lg*(g*lf - lL)*f/2 + lf*lL*g/2
                     - lh**2/8 + lk**2/2 - lL**2/4 - lf**2*g**2/4)*k**2
                  - lh*(-f*lg + g*lf - lL)*k/4 - lg**2*f**2/4)
        fs = sign * 1.0
        return (-48*c**2*p**3*lp**2
                - 32*(lf*f + 3.5*lg*g + fs*lf)*lp*c**2*p**2
                - 16*(common + (fs*2.5*lg**2 + 3*lf*lg*g)*f
                      + (lf**2 + 15*lg**2/4)*g**2 + fs*5*lf*lg*g
                      + lk**2/4 + 15*lg**2/4 - lh**2/16)*c**2*p
                - 4*mu*m**2*(f**2 - 4*g**2 - fs*2*f - 3)*(lm - 1)**2)

    b4 = (32*mu*(lm - 1)**2*m**2 - 160*c**2*p*lg**2)*g - 128*c**2*p**2*lp*lg
    return np.array([b1, beta26(-1), beta35(-1), b4, beta35(+1),
                     beta26(+1), b7])


class TestPrimer:
    def test_structure_on_circular_orbit(self):
        x = EquinoctialState(p=2.0, f=0.0, g=0.0, h=0.0, k=0.0, L=0.4)
        gm = gauss_matrices(x)
        lam = np.zeros(9)
        lam[0] = 2.0   # only lam_p
        u = primer_direction(lam, gm.b_mat)
        assert np.allclose(u, [0.0, -1.0, 0.0], atol=1e-14)
        lam[0] = -3.0
        u = primer_direction(lam, gm.b_mat)
        assert np.allclose(u, [0.0, 1.0, 0.0], atol=1e-14)

    def test_unit_norm_and_minimizing(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            kep = random_elliptic_state(rng, e_max=0.8)
            x = kepler_to_equinoctial(kep)
            lam = random_costate(rng)
            gm = gauss_matrices(x)
            u = primer_direction(lam, gm.b_mat)
            assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-14)
            best = np.dot(lam[:8] @ gm.b_mat, u)
            samples = rng.normal(size=(10_000, 3))
            samples /= np.linalg.norm(samples, axis=1)[:, None]
            vals = samples @ (lam[:8] @ gm.b_mat)
            assert best <= vals.min() + 1e-12

    def test_zero_costate_rejected(self):
        x = EquinoctialState(p=2.0, f=0.0, g=0.0, h=0.0, k=0.0, L=0.0)
        with pytest.raises(ValueError):
            primer_direction(np.zeros(9), gauss_matrices(x).b_mat)


class TestSwitchingFunction:
    def test_zero_costates_coast(self, gto_state, engine):
        s = switching_function(gto_state, Costate(), engine)
        assert s == pytest.approx(1.0)

    def test_independent_of_time_costates(self, gto_state, engine):
        rng = np.random.default_rng(2)
        lam = random_costate(rng)
        s0 = switching_value(gto_state.p, gto_state.f, gto_state.g,
                             gto_state.h, gto_state.k, 0.3, lam,
                             gto_state.m, engine.c)
        lam2 = lam.copy()
        lam2[6] += 123.0
        lam2[7] -= 45.0
        s1 = switching_value(gto_state.p, gto_state.f, gto_state.g,
                             gto_state.h, gto_state.k, 0.3, lam2,
                             gto_state.m, engine.c)
        assert float(s0) == float(s1)


class TestSwitchingPolynomial:
    def test_matches_tabulated_closed_forms(self, engine):
        rng = np.random.default_rng(21)
        for _ in range(200):
            kep = random_elliptic_state(rng, e_max=0.7, i_max_deg=120.0)
            x = kepler_to_equinoctial(kep)
            lam = random_costate(rng)
            sp = switching_poly_coeffs(x.p, x.f, x.g, x.h, x.k, lam,
                                       100.0, engine.c)
            ref = tabulated_betas(x.p, x.f, x.g, x.h, x.k, lam, 100.0,
                                  engine.c)
            scale = np.max(np.abs(ref)) + 1.0
            assert np.allclose(sp.beta, ref, rtol=1e-9, atol=1e-9 * scale)

    def test_beta1_is_half_turn_image_of_beta7(self, engine):
        # L -> L + pi maps tan(L/2) -> -1/tan(L/2) and negates
        # (f, g, h, k, lam_f, lam_g, lam_h, lam_k); the leading and
        # trailing coefficients must swap accordingly
        rng = np.random.default_rng(22)
        for _ in range(50):
            kep = random_elliptic_state(rng, e_max=0.7)
            x = kepler_to_equinoctial(kep)
            lam = random_costate(rng)
            sp = switching_poly_coeffs(x.p, x.f, x.g, x.h, x.k, lam,
                                       80.0, engine.c)
            lam_flip = lam.copy()
            lam_flip[1:5] *= -1.0
            sp_flip = switching_poly_coeffs(x.p, -x.f, -x.g, -x.h, -x.k,
                                            lam_flip, 80.0, engine.c)
            scale = np.max(np.abs(sp.beta))
            assert sp.beta[0] == pytest.approx(sp_flip.beta[6],
                                               rel=1e-9, abs=1e-9 * scale)

    def test_beta1_equals_beta7_in_fully_symmetric_case(self, engine):
        # with f = g = k = 0 and only lam_p, lam_m nonzero the half-turn
        # map is the identity, so the end coefficients coincide
        rng = np.random.default_rng(24)
        for _ in range(20):
            p = rng.uniform(1.2, 5.0)
            h = rng.uniform(-0.5, 0.5)
            lam = np.zeros(9)
            lam[0] = rng.normal() * 3
            lam[8] = rng.uniform(-0.3, 0.8)
            sp = switching_poly_coeffs(p, 0.0, 0.0, h, 0.0, lam, 80.0,
                                       engine.c)
            assert sp.beta[0] == pytest.approx(sp.beta[6], rel=1e-9)

    def test_no_real_roots_when_element_costates_vanish(self, gto_state,
                                                        engine):
        lam = np.zeros(9)
        lam[8] = 0.4   # S = 1 - lam_m = 0.6 everywhere
        sp = switching_poly_coeffs(gto_state.p, gto_state.f, gto_state.g,
                                   gto_state.h, gto_state.k, lam,
                                   gto_state.m, engine.c)

        def s_of(L):
            return switching_value(gto_state.p, gto_state.f, gto_state.g,
                                   gto_state.h, gto_state.k, L, lam,
                                   gto_state.m, engine.c)

        assert len(switching_roots(sp, s_of)) == 0

    def test_synthetic_roots_recovered(self):
        # polynomial with preset roots in tan(L/2)
        roots_x = [-1.5, -0.5, 0.5, 1.5]
        beta = np.poly(roots_x)
        beta = np.concatenate([np.zeros(7 - len(beta)), beta])
        sp = SwitchingPolynomial(beta=beta)

        def fake_s(L):
            return np.polyval(beta, np.tan(np.asarray(L) / 2.0))

        got = switching_roots(sp, fake_s)
        expect = sorted(2.0 * math.atan(r) for r in roots_x)
        assert np.allclose(got, expect, atol=1e-12)

    def test_grid_oracle_and_root_count_bound(self, engine):
        rng = np.random.default_rng(23)
        n_grid = 4096
        grid = np.linspace(-math.pi, math.pi, n_grid, endpoint=False)
        max_roots = 0
        for _ in range(2000):
            kep = random_elliptic_state(rng, e_max=0.8, i_max_deg=150.0)
            x = kepler_to_equinoctial(kep)
            lam = random_costate(rng, scale=rng.uniform(0.5, 40.0))
            m = rng.uniform(20.0, 500.0)
            sp = switching_poly_coeffs(x.p, x.f, x.g, x.h, x.k, lam, m,
                                       engine.c)

            def s_of(L):
                return switching_value(x.p, x.f, x.g, x.h, x.k, L, lam, m,
                                       engine.c)

            roots = switching_roots(sp, s_of)
            assert len(roots) <= 6
            max_roots = max(max_roots, len(roots))
            svals = np.asarray(s_of(grid))
            changes = np.nonzero(np.sign(svals[:-1]) != np.sign(svals[1:]))[0]
            # every grid sign change must have a polynomial root nearby
            for i in changes:
                lo, hi = grid[i], grid[i + 1]
                dist = min(abs(math.remainder(r - 0.5 * (lo + hi),
                                              2 * math.pi)) for r in roots)
                assert dist < (hi - lo), (kep, lam)
            # and every root must sit at a sign change (within a cell)
            for r in roots:
                i = int((r + math.pi) / (2 * math.pi) * n_grid) % n_grid
                nearby = svals[max(0, i - 2):i + 3]
                assert nearby.min() <= 1e-8 or nearby.max() >= -1e-8
        assert max_roots >= 2   # the sample exercised real switching


class TestHamiltonian:
    def test_two_form_equivalence(self, engine):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            kep = random_elliptic_state(rng, e_max=0.8)
            x = kepler_to_equinoctial(kep)
            x.m = float(rng.uniform(30, 200))
            x.alpha = float(rng.uniform(100, 5000))
            lam_arr = random_costate(rng)
            lam = Costate.from_array(lam_arr)
            sigma = float(rng.integers(0, 2))
            ke = float(rng.uniform(0, 1))
            gamma = j2_rtn(x, 0.00108263, 1.0)
            h_primer = hamiltonian(x, lam, engine, sigma, ke, gamma=gamma)
            # explicit form: alpha [T/c (1 - lam_m) + lam^T A + lam^T B (u T/m + gamma)]
            gm = gauss_matrices(x)
            thrust = engine.t_min + (engine.t_max - engine.t_min) * ke * sigma
            lamb = lam_arr[:8] @ gm.b_mat
            if np.linalg.norm(lamb) > 0:
                u = primer_direction(lam_arr, gm.b_mat)
            else:
                u = np.zeros(3)
            h_direct = x.alpha * (
                thrust / engine.c * (1.0 - lam_arr[8])
                + lam_arr[:8] @ gm.a_vec
                + lamb @ (u * thrust / x.m + gamma))
            assert h_primer == pytest.approx(h_direct, rel=1e-12, abs=1e-12)

    def test_zero_costates_zero_thrust(self, gto_state, engine):
        h = hamiltonian(gto_state, Costate(), engine, sigma=0.0, ke=1.0)
        assert h == pytest.approx(0.0, abs=1e-30)

    def test_coast_with_time_costate(self, gto_state, engine):
        lam = Costate(lam_t=0.7)
        h = hamiltonian(gto_state, lam, engine, sigma=0.0, ke=1.0)
        assert h == pytest.approx(gto_state.alpha * 0.7, rel=1e-14)


class TestEngineParams:
    def test_invariants(self):
        with pytest.raises(ValueError):
            EngineParams(t_max_n=0.1, t_min_n=0.2)
        with pytest.raises(ValueError):
            EngineParams(t_max_n=0.1, isp_s=-1.0)

    def test_canonical_values(self, engine, units):
        assert engine.c_ms == pytest.approx(9.80665 * 3100.0)
        assert engine.c == pytest.approx(
            engine.c_ms / (1000.0 * units.vu_kms), rel=1e-12)
        assert engine.t_max == pytest.approx(0.2 / units.accel_ms2, rel=1e-12)
