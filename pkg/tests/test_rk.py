import math

import numpy as np
import pytest

from lowthrust.rk import IntegratorConfig, StepUnderflow, integrate


def test_exponential_decay():
    traj = integrate(lambda t, y: -y, np.array([1.0]), (0.0, 1.0),
                     IntegratorConfig(rel_tol=1e-13, abs_tol=1e-13))
    assert traj.y_final[0] == pytest.approx(math.exp(-1.0), abs=1e-13)


def two_body_rhs(_t, y):
    r = y[:3]
    v = y[3:]
    rn = np.linalg.norm(r)
    return np.concatenate([v, -r / rn**3])


def test_two_body_energy_conservation():
    # eccentric orbit, ten revolutions
    y0 = np.array([1.0, 0.0, 0.0, 0.0, 1.3, 0.1])
    a = 1.0 / (2.0 / 1.0 - np.dot(y0[3:], y0[3:]))
    period = 2 * math.pi * a**1.5
    traj = integrate(two_body_rhs, y0, (0.0, 10 * period),
                     IntegratorConfig(rel_tol=1e-13, abs_tol=1e-13))

    def energy(y):
        return 0.5 * np.dot(y[3:], y[3:]) - 1.0 / np.linalg.norm(y[:3])

    e0 = energy(y0)
    drift = abs(energy(traj.y_final) - e0) / abs(e0)
    assert drift < 1e-11


def test_order_of_convergence():
    # smooth nonlinear problem with known solution y = tan(t + pi/8)
    def rhs(_t, y):
        return 1.0 + y * y

    y_exact = math.tan(0.8 + math.pi / 8)
    errs = []
    steps = [8, 16, 32]
    for n in steps:
        traj = integrate(rhs, np.array([math.tan(math.pi / 8)]), (0.0, 0.8),
                         IntegratorConfig(mode="fixed", fixed_steps=n))
        errs.append(abs(traj.y_final[0] - y_exact))
    slope = (math.log(errs[0]) - math.log(errs[-1])) / \
        (math.log(steps[-1]) - math.log(steps[0]))
    assert slope >= 7.5


def test_fixed_mode_deterministic_and_counts():
    y0 = np.array([1.0, 0.0, 0.0, 0.0, 1.1, 0.05])
    cfg = IntegratorConfig(mode="fixed", fixed_steps=57)
    t1 = integrate(two_body_rhs, y0, (0.0, 3.0), cfg)
    t2 = integrate(two_body_rhs, y0, (0.0, 3.0), cfg)
    assert t1.n_steps == 57
    assert np.array_equal(t1.states, t2.states)
    assert t1.taus[-1] == pytest.approx(3.0, abs=1e-15)


def test_tolerance_proportionality():
    y0 = np.array([1.0, 0.0, 0.0, 0.0, 1.3, 0.1])
    ref = integrate(two_body_rhs, y0, (0.0, 20.0),
                    IntegratorConfig(rel_tol=1e-14, abs_tol=1e-14)).y_final
    prev_err = None
    for tol in (1e-6, 1e-8, 1e-10, 1e-12):
        yf = integrate(two_body_rhs, y0, (0.0, 20.0),
                       IntegratorConfig(rel_tol=tol, abs_tol=tol)).y_final
        err = np.linalg.norm(yf - ref)
        if prev_err is not None:
            assert err <= prev_err * 1.5 + 1e-14
        prev_err = err


def test_adaptive_logs_and_rejections():
    y0 = np.array([1.0, 0.0, 0.0, 0.0, 0.9, 0.0])  # eccentric, needs control
    traj = integrate(two_body_rhs, y0, (0.0, 30.0),
                     IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10))
    assert len(traj.taus) == traj.n_steps + 1
    assert np.all(np.diff(traj.taus) > 0)
    assert traj.n_rhs >= 12 * traj.n_steps


def test_max_steps_guard():
    with pytest.raises(RuntimeError, match="max_steps"):
        integrate(lambda t, y: -y, np.array([1.0]), (0.0, 1.0),
                  IntegratorConfig(max_steps=3))


def test_step_underflow_reports_location():
    # infinitely oscillatory right-hand side: no step can resolve tau=0.5
    def rough(t, _y):
        return np.array([math.sin(1.0 / (t - 0.5)) if t != 0.5 else 0.0])

    with pytest.raises(StepUnderflow) as exc:
        integrate(rough, np.array([0.0]), (0.0, 1.0),
                  IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12,
                                   min_step=1e-10))
    assert exc.value.tau == pytest.approx(0.5, abs=0.05)


def test_complex_fixed_mode():
    h = 1e-100
    y0 = np.array([1.0 + 1j * h])
    traj = integrate(lambda t, y: -y, y0, (0.0, 1.0),
                     IntegratorConfig(mode="fixed", fixed_steps=30))
    # derivative of exp(-t) flow w.r.t. initial condition is exp(-1)
    assert traj.y_final[0].imag / h == pytest.approx(math.exp(-1.0),
                                                     rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(mode="implicit")
