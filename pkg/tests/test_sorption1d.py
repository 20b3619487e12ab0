import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiscale_lab.numerics import Grid1D, TimeStepper
from multiscale_lab.sorption1d import (
    CompareScenario,
    FullModelConfig,
    MultiscaleModelConfig,
    MultiscaleSeries,
    PotentialSpec,
    ScalarField1D,
    analytic_square_sink_solution,
    compare_full_vs_multiscale,
    compute_M,
    eval_potential,
    full_diagnostics,
    full_model_initial_state,
    multiscale_initial_state,
    run_full_model,
    run_multiscale_model,
    step_full_model,
    step_full_model_slab,
    step_multiscale_model,
    steady_state_full_model,
    two_wall_multiscale,
)

# eps * int_{0.35}^{3} exp(-(xi^-12 - 2 xi^-6)) dxi with eps = 0.05, from
# scipy.integrate.quad at tolerance 1e-14
LJ_M_EPS005_PHI1 = 0.1339268150002532
# 3^-12 - 2 * 3^-6
LJ_U_AT_XI3 = -0.0027416025485425474


def lj(eps=0.05, phi=1.0, L=2.0):
    return PotentialSpec("lennard-jones", eps=eps, L=L, phi=phi)


def test_potential_values():
    p = lj()
    assert float(eval_potential(p, 0.0)) == pytest.approx(-1.0, abs=1e-15)
    assert float(eval_potential(p, 2 * p.eps)) == pytest.approx(LJ_U_AT_XI3, rel=1e-13)
    assert float(eval_potential(lj(phi=2.5), 0.0)) == pytest.approx(-2.5)
    well = PotentialSpec("gaussian-well", eps=0.05)
    assert float(eval_potential(well, well.x0)) == pytest.approx(3.0, abs=1e-15)
    with pytest.raises(ValueError, match="singular"):
        eval_potential(p, -p.eps)


def test_potential_rejects_bad_parameters():
    with pytest.raises(ValueError, match="epsilon must be positive"):
        PotentialSpec("lennard-jones", eps=0.0)
    with pytest.raises(ValueError):
        PotentialSpec("lennard-jones", eps=0.05, L=0.0)
    with pytest.raises(ValueError):
        PotentialSpec("morse", eps=0.05)


def test_compute_M_examples():
    assert compute_M(PotentialSpec("none", eps=0.05, L=2.0), 10) == pytest.approx(0.15, rel=1e-14)
    assert compute_M(lj(phi=0.0), 10) == pytest.approx(0.05 * (3.0 - 0.35), rel=1e-14)
    assert compute_M(lj(), 40000) == pytest.approx(LJ_M_EPS005_PHI1, rel=1e-8)
    with pytest.raises(OverflowError):
        compute_M(lj(phi=800.0))


def test_compute_M_increases_with_depth():
    values = [compute_M(lj(phi=phi)) for phi in (0.5, 1.0, 2.0)]
    assert values[0] < values[1] < values[2]
    dphi = 1e-4
    for phi in (0.5, 1.0, 2.0):
        assert compute_M(lj(phi=phi + dphi)) - compute_M(lj(phi=phi - dphi)) > 0


def test_square_sink_adsorption_length():
    sol = analytic_square_sink_solution(2.0, 0.05, 1.0)
    assert sol.M == pytest.approx(0.15 * math.e**2, rel=1e-15)
    quad = compute_M(PotentialSpec("square-well", eps=0.05, L=2.0, phi=2.0), 3000)
    assert quad == pytest.approx(sol.M, rel=1e-12)
    with pytest.raises(ValueError):
        analytic_square_sink_solution(2.0, 0.0, 1.0)


def full_cfg(pot, scheme="crank-nicolson", dt=1e-4, n=None):
    grid = FullModelConfig.default_grid(pot) if n is None else Grid1D(*pot.full_domain(), n)
    return FullModelConfig(pot, 1.0, grid, TimeStepper(scheme, dt))


def test_full_model_flat_potential_uniform_state_unchanged():
    cfg = full_cfg(PotentialSpec("none", eps=0.05), n=100)
    s = ScalarField1D(cfg.grid, np.full(100, 0.7))
    np.testing.assert_allclose(step_full_model(s, cfg).values, 0.7, rtol=0, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["explicit-euler", "implicit-euler", "crank-nicolson"]),
    st.floats(0.5, 3.0),
    st.integers(0, 2**31 - 1),
)
def test_full_model_conserves_mass(scheme, phi, seed):
    pot = lj(phi=phi)
    cfg = full_cfg(pot, scheme, 1.0, n=200)
    cfg = FullModelConfig(pot, 1.0, cfg.grid, TimeStepper(scheme, 0.5 * cfg.explicit_dt_limit))
    s = ScalarField1D(cfg.grid, np.random.default_rng(seed).uniform(0, 1, 200))
    m0 = s.values.sum()
    for _ in range(5):
        s = step_full_model(s, cfg)
    assert abs(s.values.sum() - m0) <= 1e-13 * m0
    assert s.values.min() >= -1e-12


def test_full_model_explicit_step_bound():
    cfg = full_cfg(lj(), n=200)
    bad = FullModelConfig(cfg.potential, 1.0, cfg.grid, TimeStepper("explicit-euler", 2 * cfg.explicit_dt_limit))
    with pytest.raises(ValueError, match="stability"):
        step_full_model(ScalarField1D(cfg.grid, np.ones(200)), bad)


def test_full_model_reaches_boltzmann_profile():
    pot = lj(phi=3.0)
    cfg = full_cfg(pot, "implicit-euler", 0.5, n=300)
    s = full_model_initial_state(cfg, 1.0)
    mass = s.values.sum() * cfg.grid.h
    s = run_full_model(s, cfg, 20.0)
    # zero-flux steady state of c' = -c V'; the Scharfetter-Gummel fluxes vanish exactly on exp(-V)
    boltz = np.exp(-cfg.potential_values)
    boltz *= mass / (cfg.grid.h * boltz.sum())
    assert np.max(np.abs(s.values - boltz)) / boltz.max() < 1e-6
    direct = steady_state_full_model(cfg, mass)
    assert np.max(np.abs(direct.values - boltz)) / boltz.max() < 1e-8


def test_full_diagnostics_split_mass():
    cfg = full_cfg(lj(), n=400)
    s = full_model_initial_state(cfg, 1.0)
    d = full_diagnostics(s, cfg)
    assert d.total_mass == pytest.approx(1.0 - cfg.grid.x_min, rel=1e-12)
    assert d.c_at_wall == pytest.approx(1.0)


def ms_cfg(M, n=200, dt=1e-4, scheme="crank-nicolson", M_right=0.0):
    return MultiscaleModelConfig(1.0, M, Grid1D(0.0, 1.0, n), TimeStepper(scheme, dt), M_right)


def test_multiscale_uniform_state_steady():
    for M in (0.0, 0.3):
        cfg = ms_cfg(M)
        s = multiscale_initial_state(cfg, 1.0)
        out = step_multiscale_model(s, cfg)
        np.testing.assert_allclose(out.values, 1.0, atol=1e-14)
        assert out.wall_value() == pytest.approx(1.0, abs=1e-14)


def test_multiscale_uniform_limit():
    cfg = ms_cfg(0.1, dt=1e-3)
    s = run_multiscale_model(multiscale_initial_state(cfg, lambda x: x), cfg, 5.0)
    np.testing.assert_allclose(s.values, 0.5 / 1.1, atol=1e-4)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["explicit-euler", "implicit-euler", "crank-nicolson"]),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
    st.integers(0, 2**31 - 1),
)
def test_multiscale_conserves_total(scheme, M, M_right, seed):
    cfg = ms_cfg(M, n=50, M_right=M_right)
    cfg = MultiscaleModelConfig(1.0, M, cfg.grid, TimeStepper(scheme, 0.5 * cfg.explicit_dt_limit), M_right)
    c = np.random.default_rng(seed).uniform(0, 1, 50)
    s = ScalarField1D(cfg.grid, c, 0.0, c[0], c[-1])
    m0 = cfg.conserved_mass(s)
    for _ in range(5):
        s = step_multiscale_model(s, cfg)
    assert abs(cfg.conserved_mass(s) - m0) <= 1e-12 * m0
    assert s.values.min() >= -1e-12


def test_two_wall_symmetry_and_reduction():
    cfg = ms_cfg(0.2, M_right=0.2)
    step = two_wall_multiscale(cfg)
    s = multiscale_initial_state(cfg, lambda x: 1.0 + np.cos(2 * np.pi * x))
    for _ in range(50):
        s = step(s)
    np.testing.assert_allclose(s.values, s.values[::-1], atol=1e-13)
    assert s.ghost_left == pytest.approx(s.ghost_right, abs=1e-13)

    one = ms_cfg(0.2)
    a = b = multiscale_initial_state(one, lambda x: x)
    for _ in range(10):
        a = two_wall_multiscale(one)(a)
        b = step_multiscale_model(b, one)
    np.testing.assert_array_equal(a.values, b.values)

    u = multiscale_initial_state(cfg, 2.0)
    np.testing.assert_allclose(step(u).values, 2.0, atol=1e-14)


def test_series_eigenvalues():
    assert MultiscaleSeries(0.0, 1.0).eigenvalues(1)[1] == pytest.approx(math.pi)
    mus = MultiscaleSeries(0.3, 1.0).eigenvalues(5)[1:]
    np.testing.assert_allclose(np.sin(mus) + 0.3 * mus * np.cos(mus), 0.0, atol=1e-13)


def test_series_matches_multiscale_solver():
    M = 0.3
    c0 = lambda x: 1.0 + 0.5 * np.cos(np.pi * x)
    cfg = ms_cfg(M, n=400, dt=1e-4)
    s = run_multiscale_model(multiscale_initial_state(cfg, c0), cfg, 0.1)
    series = MultiscaleSeries(M, 1.0).evaluate(c0, cfg.grid.centers, 0.1, n_terms=80)
    assert np.max(np.abs(series - s.values)) < 1e-4


def test_compare_rejects_zero_epsilon():
    with pytest.raises(ValueError, match="epsilon must be positive"):
        compare_full_vs_multiscale([0.0])


def test_compare_flat_potential_converges():
    sc = CompareScenario(phi=0.0, c0=lambda x: 1.0 + np.cos(np.pi * x), output_times=(0.01,), dt=1e-4,
                         multiscale_cells=200, cells_per_eps=10)
    rows = compare_full_vs_multiscale([0.04, 0.02, 0.01], sc)
    errs = [r.sup_error for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[2] >= 4.0 * 0.9


def test_slab_splitting_conserves_mass():
    cfg = full_cfg(lj(), "implicit-euler", 1e-3, n=100)
    rng = np.random.default_rng(3)
    values = rng.uniform(0, 1, (100, 8))
    out = step_full_model_slab(values, cfg, 0.1)
    assert out.sum() == pytest.approx(values.sum(), rel=1e-13)
    flat = np.tile(values[:, :1], (1, 8))
    np.testing.assert_allclose(step_full_model_slab(flat, cfg, 0.1), np.tile(step_full_model(ScalarField1D(cfg.grid, values[:, 0]), cfg).values[:, None], (1, 8)), atol=1e-14)
