import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiscale_lab.shallow_water import (
    ChannelState,
    channel_dt_limit,
    channel_velocity_from_2d,
    exact_riemann,
    riemann_hll,
    rotate_state,
    rotation_matrix,
    rotational_invariance_check,
    step_channel,
    sw_flux_1d,
    sw_flux_2d,
)

# Dam break h = 1 | 0.1 at rest, g = 9.81: star depth from the left-rarefaction /
# right-shock matching condition solved by bisection, the star velocity from the
# left Riemann invariant, and the shock speed from the mass jump condition.
DAM_H_STAR = 0.3961748167994429
DAM_U_STAR = 2.3213549956407444
DAM_SHOCK_SPEED = 3.1051336506682135

wet = st.tuples(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))


def test_flux_examples():
    np.testing.assert_allclose(sw_flux_1d([1.0, 0.0]), [0.0, 4.905], rtol=1e-15)
    np.testing.assert_array_equal(sw_flux_1d([0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_allclose(sw_flux_1d([2.0, 2.0]), [2.0, 21.62], rtol=1e-15)
    with pytest.raises(ValueError, match="negative"):
        sw_flux_1d([-1e-6, 0.0])


def test_flux_2d_components():
    F, G = sw_flux_2d([2.0, 2.0, 4.0], 9.81)
    np.testing.assert_allclose(F, [2.0, 2.0 + 19.62, 4.0])
    np.testing.assert_allclose(G, [4.0, 4.0, 8.0 + 19.62])


def test_rotation_examples():
    q = np.array([1.3, 0.4, -0.7])
    np.testing.assert_array_equal(rotate_state(q, 0.0), q)
    np.testing.assert_allclose(rotate_state([1.0, 1.0, 0.0], math.pi / 2), [1.0, 0.0, -1.0], atol=1e-16)
    np.testing.assert_allclose(rotation_matrix(0.3) @ q, rotate_state(q, 0.3), atol=1e-16)


@settings(max_examples=100, deadline=None)
@given(wet, st.floats(-math.pi, math.pi))
def test_rotation_round_trip(q, theta):
    q = np.array(q)
    back = rotate_state(rotate_state(q, theta), theta, inverse=True)
    assert np.max(np.abs(back - q)) < 1e-14
    assert rotate_state(q, theta)[0] == q[0]


def test_rotational_invariance_examples():
    q = np.array([1.5, 0.6, -0.9])
    assert rotational_invariance_check(q, 0.0) == 0.0
    assert rotational_invariance_check(q, math.pi / 2) < 1e-13


@settings(max_examples=300, deadline=None)
@given(wet, st.floats(-math.pi, math.pi))
def test_rotational_invariance_property(q, theta):
    assert rotational_invariance_check(np.array(q), theta) < 1e-11


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 5.0), st.floats(-3.0, 3.0))
def test_hll_consistency(h, u):
    q = np.array([h, h * u])
    np.testing.assert_allclose(riemann_hll(q, q), sw_flux_1d(q), rtol=1e-14, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 2.0))
def test_hll_symmetric_collision_has_no_mass_flux(h, u):
    f = riemann_hll(np.array([h, h * u]), np.array([h, -h * u]))
    assert abs(f[0]) < 1e-13


def test_hll_dry_states():
    with pytest.raises(ValueError, match="dry"):
        riemann_hll(np.zeros(2), np.zeros(2))
    f = riemann_hll(np.array([1.0, 0.0]), np.zeros(2))
    assert f[0] > 0


def test_exact_riemann_dam_break_oracle():
    sol = exact_riemann(1.0, 0.0, 0.1, 0.0)
    assert sol.h_star == pytest.approx(DAM_H_STAR, rel=1e-12)
    assert sol.u_star == pytest.approx(DAM_U_STAR, rel=1e-12)
    assert sol.right_front_speed == pytest.approx(DAM_SHOCK_SPEED, rel=1e-12)
    assert not sol.left_is_shock and sol.right_is_shock
    h, u = sol.sample([-10.0, 0.5 * (sol.u_star + DAM_SHOCK_SPEED), 10.0])
    np.testing.assert_allclose(h, [1.0, DAM_H_STAR, 0.1])
    with pytest.raises(ValueError):
        exact_riemann(1.0, -10.0, 1.0, 10.0)


def test_dam_break_against_exact_solution():
    n, t_end = 400, 0.2
    x = -1.0 + (np.arange(n) + 0.5) * 2.0 / n
    ch = ChannelState(np.where(x < 0, 1.0, 0.1), np.zeros(n), 2.0, bc_left="transmissive", bc_right="transmissive")
    t = 0.0
    while t < t_end - 1e-14:
        dt = min(channel_dt_limit(ch), t_end - t)
        ch = step_channel(ch, dt)
        t += dt
    mid = 0.5 * (DAM_U_STAR * t_end + DAM_SHOCK_SPEED * t_end)
    assert float(np.interp(mid, x, ch.h)) == pytest.approx(DAM_H_STAR, rel=0.02)
    level = 0.5 * (DAM_H_STAR + 0.1)
    front = x[np.nonzero(ch.h > level)[0].max()]
    assert front == pytest.approx(DAM_SHOCK_SPEED * t_end, rel=0.02)
    exact_h, _ = exact_riemann(1.0, 0.0, 0.1, 0.0).sample(x / t_end)
    assert np.mean(np.abs(ch.h - exact_h)) < 0.01


def test_still_water_unchanged():
    ch = ChannelState(np.full(50, 0.8), np.zeros(50), 1.0)
    out = step_channel(ch, channel_dt_limit(ch))
    np.testing.assert_array_equal(out.h, ch.h)
    np.testing.assert_allclose(out.hu, 0.0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_wall_channel_conserves_mass(seed):
    rng = np.random.default_rng(seed)
    ch = ChannelState(rng.uniform(0.2, 2.0, 60), rng.uniform(-0.5, 0.5, 60), 3.0)
    m0 = ch.mass
    for _ in range(50):
        ch = step_channel(ch, channel_dt_limit(ch))
    assert abs(ch.mass - m0) <= 1e-12 * m0
    assert ch.h.min() >= 0


def test_cfl_violation_rejected():
    ch = ChannelState(np.ones(10), np.zeros(10), 1.0)
    with pytest.raises(ValueError, match="CFL"):
        step_channel(ch, 2 * channel_dt_limit(ch))


def test_junction_end_needs_flux():
    ch = ChannelState(np.ones(10), np.zeros(10), 1.0, bc_right="junction")
    with pytest.raises(ValueError, match="junction"):
        step_channel(ch, 1e-3)


def test_channel_velocity_from_2d():
    assert channel_velocity_from_2d(2.0, 0.0, 1.0) == 2.0
    assert channel_velocity_from_2d(3.0, 4.0, 0.5) == 5.0
    assert channel_velocity_from_2d(3.0, 4.0, -0.5) == -5.0
    assert channel_velocity_from_2d(-1.0, 0.0, 0.0) == -1.0
    assert channel_velocity_from_2d(0.0, 0.0, 0.0) == 0.0
