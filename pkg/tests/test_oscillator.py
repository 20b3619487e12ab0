import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiscale_lab.numerics import TimeStepper
from multiscale_lab.oscillator import (
    OscillatorParams,
    OscillatorRegime,
    PendulumParams,
    analytic_solution,
    classify_regime,
    measure_period,
    overdamped_limit_solution,
    overdamped_limit_velocity,
    rigid_period_elliptic,
    simulate_rigid_pendulum,
    simulate_stiff_pendulum,
)

# 4 sqrt(L/g) K(sin^2(15 deg)) for L = 1, g = 9.81, from scipy.special.ellipk
RIGID_PERIOD_30DEG = 2.0409898895191305


@pytest.mark.parametrize(
    "m,k,gamma,regime",
    [
        (1, 1, 0, OscillatorRegime.UNDAMPED),
        (1, 1, 2, OscillatorRegime.CRITICAL),
        (1, 1, 3, OscillatorRegime.OVERDAMPED),
        (1, 1, 1, OscillatorRegime.UNDERDAMPED),
        (1, 0, 1, OscillatorRegime.NO_SPRING),
    ],
)
def test_classify(m, k, gamma, regime):
    assert classify_regime(OscillatorParams(m, k, gamma)) is regime


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.0, 20), st.floats(1e-3, 1e3),
)
def test_classify_scale_invariant(m, k, gamma, alpha):
    p = OscillatorParams(m, k, gamma)
    q = OscillatorParams(alpha * m, alpha * k, alpha * gamma)
    assert classify_regime(p) is classify_regime(q)


def test_invalid_params():
    with pytest.raises(ValueError, match="mass"):
        OscillatorParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, 1.0, -1.0)


def test_analytic_examples():
    x, _ = analytic_solution(OscillatorParams(1, 0, 2), 0.0, 1.0, 200.0)
    assert float(x) == pytest.approx(0.5, abs=1e-14)
    x, _ = analytic_solution(OscillatorParams(1, 4, 0), 1.0, 0.0, math.pi)
    assert float(x) == pytest.approx(1.0, abs=1e-14)
    t = np.linspace(0, 5, 11)
    x, v = analytic_solution(OscillatorParams(1, 1, 2), 1.0, -1.0, t)
    np.testing.assert_allclose(x, np.exp(-t), atol=1e-15)
    np.testing.assert_allclose(v, -np.exp(-t), atol=1e-15)
    x, v = analytic_solution(OscillatorParams(1, 0, 0), 1.0, 2.0, 3.0)
    assert float(x) == 7.0 and float(v) == 2.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(-2, 2), st.floats(-2, 2))
def test_undamped_energy_conserved(m, k, x0, v0):
    t = np.linspace(0, 20, 201)
    x, v = analytic_solution(OscillatorParams(m, k, 0.0), x0, v0, t)
    e = 0.5 * m * v**2 + 0.5 * k * x**2
    assert np.max(np.abs(e - e[0])) <= 1e-12 * max(1.0, e[0])


def test_initial_conditions_reproduced():
    for gamma in (0.0, 0.5, 2.0, 5.0):
        x, v = analytic_solution(OscillatorParams(1.0, 1.0, gamma), 0.3, -0.7, 0.0)
        assert float(x) == pytest.approx(0.3, abs=1e-15) and float(v) == pytest.approx(-0.7, abs=1e-15)


def test_overdamped_limit_examples():
    assert float(overdamped_limit_solution(2.0, 3.0, 0.0)) == 3.0
    assert float(overdamped_limit_solution(1.0, 1.0, 1.0)) == pytest.approx(math.exp(-1))
    assert float(overdamped_limit_velocity(2.0, 1.0)) == -0.5
    with pytest.raises(ValueError):
        overdamped_limit_solution(0.0, 1.0, 1.0)


def test_pendulum_equilibrium_hold():
    p = PendulumParams(1.0, 1.0, 100.0, 9.81, 0.0)
    traj = simulate_stiff_pendulum(p, None, 1.0, start="balanced")
    np.testing.assert_allclose(traj.x1, 0.0, atol=1e-15)
    np.testing.assert_allclose(traj.x2, 1.0 + 9.81 / 100.0, atol=1e-12)


def test_pendulum_under_resolved_step_rejected():
    p = PendulumParams(1.0, 1.0, 1e4, 9.81, 0.5)
    with pytest.raises(ValueError, match="under-resolves"):
        simulate_stiff_pendulum(p, TimeStepper("rk4", 0.01), 1.0)


def test_pendulum_tension_positive_and_violation_shrinks():
    violations = []
    for k in (1e2, 1e3, 1e4):
        p = PendulumParams(1.0, 1.0, k, 9.81, math.radians(30))
        traj = simulate_stiff_pendulum(p, None, 2.0)
        assert traj.tension[1:].min() > 0
        assert traj.tension.max() < 30.0
        violations.append(traj.max_constraint_violation)
    assert violations[0] / violations[1] >= 5 and violations[1] / violations[2] >= 5
    rows = list(traj.rows())
    assert len(rows[0]) == 6


def test_rigid_pendulum_rest_and_small_angle():
    st_ = TimeStepper("rk4", 1e-3)
    rest = simulate_rigid_pendulum(1.0, 9.81, 0.0, st_, 1.0)
    assert np.all(rest.theta == 0.0)
    small = simulate_rigid_pendulum(1.0, 9.81, math.radians(1.0), st_, 8.0)
    period = measure_period(small.t, small.theta)
    assert period == pytest.approx(2 * math.pi * math.sqrt(1 / 9.81), rel=1e-3)


def test_rigid_period_matches_elliptic_oracle():
    assert rigid_period_elliptic(1.0, 9.81, math.radians(30)) == pytest.approx(RIGID_PERIOD_30DEG, rel=1e-13)
    traj = simulate_rigid_pendulum(1.0, 9.81, math.radians(30), TimeStepper("rk4", 1e-3), 10.0)
    assert measure_period(traj.t, traj.theta) == pytest.approx(RIGID_PERIOD_30DEG, rel=1e-5)
    assert traj.energy_drift < 1e-9


def test_measure_period_needs_two_crossings():
    t = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        measure_period(t, np.cos(t))
