"""One-dimensional sorption kinetics: resolved drift-diffusion vs. the reduced model.

Full model, on ``[x_a, x_b]`` with zero-flux walls::

    c_t = -J_x,   J = -D (c_x + c V'),

where ``V`` is the trapping potential already divided by ``k_B T``.

Reduced (multiscale) model, on the fluid domain only::

    c_t = D c_xx,   M c_t = D c_x at the adsorbing wall,

with the adsorption length ``M = eps * int exp(-U(xi)) dxi``.

Both use cell-centred grids.  The full model uses exponentially fitted
(Scharfetter-Gummel) face fluxes, so its discrete steady state is exactly the
Boltzmann profile ``exp(-V)``.  In the reduced model each adsorbing wall has
one ghost cell ``c_g``; the wall value is ``(c_g + c_1)/2`` and the wall slope
``(c_1 - c_g)/h``, both second order on the cell-centred layout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .numerics import Grid1D, TimeStepper, quad_trapezoid, solve_tridiagonal

__all__ = [
    "XI_FLOOR",
    "PotentialSpec",
    "ScalarField1D",
    "FullModelConfig",
    "MultiscaleModelConfig",
    "SorptionDiagnostics",
    "CompareScenario",
    "CompareRow",
    "SquareSinkSolution",
    "MultiscaleSeries",
    "eval_potential",
    "compute_M",
    "bernoulli",
    "step_full_model",
    "step_multiscale_model",
    "two_wall_multiscale",
    "run_full_model",
    "run_multiscale_model",
    "steady_state_full_model",
    "full_model_initial_state",
    "multiscale_initial_state",
    "full_diagnostics",
    "multiscale_diagnostics",
    "compare_full_vs_multiscale",
    "analytic_square_sink_solution",
    "step_full_model_slab",
]

# The LJ wall at xi=0 is replaced by a zero-flux wall at XI_FLOOR, where
# U = phi * 0.35**-12 ~ 2.9e5 phi and exp(-U) underflows to zero.
XI_FLOOR = 0.35
EXP_OVERFLOW = 700.0
POSITIVITY_TOL = 1e-12

POTENTIAL_TAGS = ("lennard-jones", "gaussian-well", "two-wall-gaussian", "square-well", "none")


@dataclass(frozen=True)
class PotentialSpec:
    """Trapping potential in units of ``k_B T``.

    ``eps`` is the range and ``L`` the scaled cutoff: the potential acts on a
    layer of width about ``(L + 1) eps`` next to the trap.  ``phi`` is the well
    depth ``E/(k_B T)`` for the Lennard-Jones and square wells.  The Gaussian
    shapes use ``a1 exp(-b1 s^2) - a2 exp(-b2 s^2)`` with ``s = (x - x_c)/eps``.
    """

    tag: str
    eps: float
    L: float = 2.0
    phi: float = 1.0
    a1: float = 6.0
    b1: float = 30.0
    a2: float = 3.0
    b2: float = 10.0
    x0: float = 0.5
    walls: tuple[float, float] = (0.0, 1.0)
    xi_floor: float = XI_FLOOR

    def __post_init__(self):
        if self.tag not in POTENTIAL_TAGS:
            raise ValueError(f"unknown potential tag {self.tag!r}; expected one of {POTENTIAL_TAGS}")
        if not self.eps > 0:
            raise ValueError(f"epsilon must be positive, got {self.eps}")
        if not self.L > 0:
            raise ValueError(f"cutoff L must be positive, got {self.L}")

    def U(self, xi):
        """Nondimensional potential as a function of the layer coordinate ``xi``."""
        xi = np.asarray(xi, dtype=float)
        if self.tag == "lennard-jones":
            with np.errstate(divide="ignore", over="ignore"):
                inv6 = xi**-6.0
                return self.phi * (inv6 * inv6 - 2.0 * inv6)
        if self.tag == "square-well":
            return np.where((xi >= 0) & (xi <= self.L + 1.0), -self.phi, 0.0)
        if self.tag in ("gaussian-well", "two-wall-gaussian"):
            s2 = xi * xi
            return self.a1 * np.exp(-self.b1 * s2) - self.a2 * np.exp(-self.b2 * s2)
        return np.zeros_like(xi)

    def layer_range(self) -> tuple[float, float]:
        """Integration range in ``xi`` for the adsorption length (per wall)."""
        if self.tag == "lennard-jones":
            return (self.xi_floor, self.L + 1.0)
        if self.tag == "gaussian-well":
            return (0.0, self.L)
        if self.tag == "two-wall-gaussian":
            return (-1.0, self.L)
        return (0.0, self.L + 1.0)

    def full_domain(self) -> tuple[float, float]:
        """Domain of the resolved model, walls included."""
        if self.tag == "lennard-jones":
            return (self.eps * (self.xi_floor - 1.0), 1.0)
        if self.tag == "gaussian-well":
            return (self.x0, 1.0)
        if self.tag == "two-wall-gaussian":
            return (self.walls[0] - self.eps, self.walls[1] + self.eps)
        return (-self.eps, 1.0)

    def reduced_domain(self) -> tuple[float, float]:
        """Fluid domain of the multiscale model (the trap sits at the left end)."""
        if self.tag == "gaussian-well":
            return (self.x0, 1.0)
        if self.tag == "two-wall-gaussian":
            return self.walls
        return (0.0, 1.0)

    def layer_edge(self) -> float:
        """Position beyond which the potential is switched off, ``x = L eps`` for the LJ layer."""
        left = self.reduced_domain()[0]
        return left + self.L * self.eps


def eval_potential(p: PotentialSpec, x):
    """Dimensionless potential ``V(x)/(k_B T)`` at physical positions ``x``."""
    x = np.asarray(x, dtype=float)
    if p.tag == "lennard-jones":
        if np.any(x <= -p.eps):
            raise ValueError(f"Lennard-Jones potential is singular for x <= -eps = {-p.eps}")
        xi = 1.0 + x / p.eps
        return np.where(xi <= p.L + 1.0, p.U(xi), 0.0)
    if p.tag == "square-well":
        return p.U(1.0 + x / p.eps)
    if p.tag == "gaussian-well":
        return p.U((x - p.x0) / p.eps)
    if p.tag == "two-wall-gaussian":
        return p.U((x - p.walls[0]) / p.eps) + p.U((x - p.walls[1]) / p.eps)
    return np.zeros_like(x)


def compute_M(p: PotentialSpec, n_quad: int = 2000) -> float:
    """Adsorption length ``eps * int exp(-U(xi)) dxi`` over the trap layer (trapezoid rule)."""
    lo, hi = p.layer_range()
    xi = np.linspace(lo, hi, n_quad + 1)
    minus_u = -p.U(xi)
    if np.max(minus_u) > EXP_OVERFLOW:
        raise OverflowError(f"exp(-U) overflows: max(-U) = {np.max(minus_u):.4g} exceeds {EXP_OVERFLOW}")
    return p.eps * quad_trapezoid(np.exp(minus_u), lo, hi, n_quad)


def bernoulli(z):
    """``B(z) = z / (exp(z) - 1)`` with ``B(0) = 1``, safe for large ``|z|``."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    small = np.abs(z) < 1e-8
    big = ~small
    with np.errstate(over="ignore"):
        out[big] = z[big] / np.expm1(z[big])
    out[small] = 1.0 - 0.5 * z[small]
    return out


# --------------------------------------------------------------------------
# states and diagnostics


@dataclass
class ScalarField1D:
    """Cell-centred samples; ghost cells carry the adsorbing-wall unknowns."""

    grid: Grid1D
    values: np.ndarray
    t: float = 0.0
    ghost_left: float | None = None
    ghost_right: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {self.values.shape}")

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    def wall_value(self, side: str = "left") -> float:
        if side == "left":
            g = self.ghost_left
            return float(self.values[0] if g is None else 0.5 * (g + self.values[0]))
        g = self.ghost_right
        return float(self.values[-1] if g is None else 0.5 * (g + self.values[-1]))

    def copy(self) -> "ScalarField1D":
        return replace(self, values=self.values.copy())


@dataclass(frozen=True)
class SorptionDiagnostics:
    t: float
    bulk_mass: float
    adsorbed_mass: float
    c_at_wall: float

    @property
    def total_mass(self) -> float:
        return self.bulk_mass + self.adsorbed_mass

    def row(self):
        return (self.t, self.bulk_mass, self.adsorbed_mass, self.total_mass, self.c_at_wall)


def _warn_negative(values: np.ndarray, where: str):
    low = float(values.min())
    if low < -POSITIVITY_TOL:
        warnings.warn(f"{where}: concentration went negative ({low:.3e})", RuntimeWarning, stacklevel=3)


def _theta_lhs_rhs(lower, diag, upper, dt, theta):
    """Tridiagonal pieces of ``(I - theta dt A)`` and ``(I + (1 - theta) dt A)``."""
    lhs = (-theta * dt * lower, 1.0 - theta * dt * diag, -theta * dt * upper)
    rhs = ((1 - theta) * dt * lower, 1.0 + (1 - theta) * dt * diag, (1 - theta) * dt * upper)
    return lhs, rhs


def _tri_matvec(lower, diag, upper, v):
    out = diag * v
    out[1:] += lower[1:] * v[:-1]
    out[:-1] += upper[:-1] * v[1:]
    return out


# --------------------------------------------------------------------------
# full model


@dataclass(frozen=True)
class FullModelConfig:
    potential: PotentialSpec
    D: float
    grid: Grid1D
    stepper: TimeStepper

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"diffusivity must be positive, got {self.D}")
        lo, hi = self.potential.full_domain()
        if self.potential.tag == "lennard-jones" and self.grid.x_min <= -self.potential.eps:
            raise ValueError("full-model grid must start inside the LJ wall (x > -eps)")

    @classmethod
    def default_grid(cls, potential: PotentialSpec, cells_per_eps: int = 20, min_cells: int = 200) -> Grid1D:
        lo, hi = potential.full_domain()
        h_target = potential.eps / cells_per_eps
        n = max(min_cells, int(math.ceil((hi - lo) / h_target)))
        return Grid1D(lo, hi, n)

    @cached_property
    def potential_values(self) -> np.ndarray:
        return eval_potential(self.potential, self.grid.centers)

    @cached_property
    def operator(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Tridiagonal ``(lower, diag, upper)`` of the semi-discrete operator ``dc/dt = A c``."""
        v = self.potential_values
        n, h = v.size, self.grid.h
        dv = np.diff(v)
        with np.errstate(invalid="ignore"):
            b_fwd = bernoulli(dv)  # weight of the upwind cell i at face i+1/2
            b_bwd = bernoulli(-dv)  # weight of cell i+1
        k = self.D / h**2
        lower = np.zeros(n)
        upper = np.zeros(n)
        diag = np.zeros(n)
        lower[1:] = k * b_fwd
        upper[:-1] = k * b_bwd
        diag[:-1] -= k * b_fwd
        diag[1:] -= k * b_bwd
        return lower, diag, upper

    @cached_property
    def explicit_dt_limit(self) -> float:
        """Largest explicit-Euler step that keeps the update monotone."""
        return float(1.0 / np.max(np.abs(self.operator[1])))

    @cached_property
    def _theta_system(self):
        lower, diag, upper = self.operator
        return _theta_lhs_rhs(lower, diag, upper, self.stepper.dt, self.stepper.theta)

    def layer_mask(self) -> np.ndarray:
        return self.grid.centers < self.potential.layer_edge()


def full_model_initial_state(cfg: FullModelConfig, c0: Callable | float = 1.0) -> ScalarField1D:
    """Initial data ``c0`` on the fluid part, extended into the trap layer by its value at the layer edge."""
    x = cfg.grid.centers
    edge = cfg.potential.layer_edge()
    f = c0 if callable(c0) else (lambda s: np.full_like(np.asarray(s, dtype=float), float(c0)))
    values = np.asarray(f(np.maximum(x, edge)), dtype=float)
    if cfg.potential.tag == "two-wall-gaussian":
        right_edge = cfg.potential.walls[1] - cfg.potential.L * cfg.potential.eps
        values = np.asarray(f(np.clip(x, edge, right_edge)), dtype=float)
    return ScalarField1D(cfg.grid, values)


def step_full_model(state: ScalarField1D, cfg: FullModelConfig) -> ScalarField1D:
    """One conservative step of the drift-diffusion model with zero-flux walls."""
    _warn_negative(state.values, "full model")
    lower, diag, upper = cfg.operator
    dt = cfg.stepper.dt
    if cfg.stepper.scheme == "explicit-euler":
        if dt > cfg.explicit_dt_limit * (1 + 1e-12):
            raise ValueError(f"explicit step dt={dt:.4g} exceeds the stability bound {cfg.explicit_dt_limit:.4g}")
        new = state.values + dt * _tri_matvec(lower, diag, upper, state.values)
    elif cfg.stepper.scheme == "rk4":
        raise ValueError("use explicit-euler, implicit-euler or crank-nicolson for the PDE models")
    else:
        (ll, ld, lu), (rl, rd, ru) = cfg._theta_system
        rhs = _tri_matvec(rl, rd, ru, state.values)
        new = solve_tridiagonal(ll, ld, lu, rhs)
    return ScalarField1D(cfg.grid, new, state.t + dt)


def run_full_model(state: ScalarField1D, cfg: FullModelConfig, t_end: float, callback=None) -> ScalarField1D:
    n = int(round((t_end - state.t) / cfg.stepper.dt))
    if n < 0 or not math.isclose(state.t + n * cfg.stepper.dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"t_end={t_end} is not reachable from t={state.t} in steps of {cfg.stepper.dt}")
    for _ in range(n):
        state = step_full_model(state, cfg)
        if callback is not None:
            callback(state)
    state.t = t_end
    return state


def steady_state_full_model(cfg: FullModelConfig, mass: float) -> ScalarField1D:
    """Zero-flux steady state with prescribed total mass, by a direct tridiagonal solve.

    The singular operator is made regular by pinning the cell at the bottom of
    the well to 1; the result is rescaled to ``mass``.
    """
    lower, diag, upper = (a.copy() for a in cfg.operator)
    pin = int(np.argmin(cfg.potential_values))
    lower[pin], diag[pin], upper[pin] = 0.0, 1.0, 0.0
    rhs = np.zeros(diag.size)
    rhs[pin] = 1.0
    c = solve_tridiagonal(lower, diag, upper, rhs)
    c *= mass / (cfg.grid.h * c.sum())
    return ScalarField1D(cfg.grid, c)


def full_diagnostics(state: ScalarField1D, cfg: FullModelConfig) -> SorptionDiagnostics:
    h = cfg.grid.h
    layer = cfg.layer_mask()
    if cfg.potential.tag == "two-wall-gaussian":
        right_edge = cfg.potential.walls[1] - cfg.potential.L * cfg.potential.eps
        layer = layer | (cfg.grid.centers > right_edge)
    adsorbed = h * float(state.values[layer].sum())
    bulk = h * float(state.values[~layer].sum())
    edge = cfg.potential.layer_edge()
    c_wall = float(np.interp(edge, cfg.grid.centers, state.values))
    return SorptionDiagnostics(state.t, bulk, adsorbed, c_wall)


# --------------------------------------------------------------------------
# multiscale model


@dataclass(frozen=True)
class MultiscaleModelConfig:
    D: float
    M: float
    grid: Grid1D
    stepper: TimeStepper
    M_right: float = 0.0

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"diffusivity must be positive, got {self.D}")
        if self.M < 0 or self.M_right < 0:
            raise ValueError("adsorption lengths must be >= 0")

    @cached_property
    def system(self):
        """Mass matrix ``B`` and operator ``A`` of ``B du/dt = A u`` on ``[g_L, c_1..c_N, g_R]``."""
        n, h, D = self.grid.n_cells, self.grid.h, self.D
        size = n + 2
        k = D / h**2
        a_lo, a_di, a_up = np.zeros(size), np.zeros(size), np.zeros(size)
        b_lo, b_di, b_up = np.zeros(size), np.zeros(size), np.zeros(size)
        a_lo[1 : n + 1] = k
        a_up[1 : n + 1] = k
        a_di[1 : n + 1] = -2 * k
        b_di[1 : n + 1] = 1.0
        # left wall row: M d/dt (g + c1)/2 = D (c1 - g)/h
        b_di[0], b_up[0] = 0.5 * self.M, 0.5 * self.M
        a_di[0], a_up[0] = -D / h, D / h
        # right wall row: M_R d/dt (g + cN)/2 = D (cN - g)/h
        b_di[-1], b_lo[-1] = 0.5 * self.M_right, 0.5 * self.M_right
        a_di[-1], a_lo[-1] = -D / h, D / h
        return (b_lo, b_di, b_up), (a_lo, a_di, a_up)

    @cached_property
    def explicit_dt_limit(self) -> float:
        h, D = self.grid.h, self.D
        limit = h * h / (3.0 * D) if (self.M > 0 or self.M_right > 0) else h * h / (2.0 * D)
        for m in (self.M, self.M_right):
            if m > 0:
                limit = min(limit, h * m / (2.0 * D))
        return limit

    @cached_property
    def _step_system(self):
        (b_lo, b_di, b_up), (a_lo, a_di, a_up) = self.system
        dt, th = self.stepper.dt, self.stepper.theta
        lhs = [b_lo - th * dt * a_lo, b_di - th * dt * a_di, b_up - th * dt * a_up]
        rhs = [b_lo + (1 - th) * dt * a_lo, b_di + (1 - th) * dt * a_di, b_up + (1 - th) * dt * a_up]
        # a wall without adsorption is the algebraic Neumann row g - c = 0
        if self.M == 0:
            lhs[1][0], lhs[2][0] = 1.0, -1.0
            for r in rhs:
                r[0] = 0.0
        if self.M_right == 0:
            lhs[1][-1], lhs[0][-1] = 1.0, -1.0
            for r in rhs:
                r[-1] = 0.0
        return tuple(lhs), tuple(rhs)

    def pack(self, state: ScalarField1D) -> np.ndarray:
        u = np.empty(self.grid.n_cells + 2)
        u[1:-1] = state.values
        u[0] = state.values[0] if state.ghost_left is None else state.ghost_left
        u[-1] = state.values[-1] if state.ghost_right is None else state.ghost_right
        return u

    def unpack(self, u: np.ndarray, t: float) -> ScalarField1D:
        return ScalarField1D(self.grid, u[1:-1].copy(), t, float(u[0]), float(u[-1]))

    def conserved_mass(self, state: ScalarField1D) -> float:
        return multiscale_diagnostics(state, self).total_mass


def multiscale_initial_state(cfg: MultiscaleModelConfig, c0: Callable | float = 1.0) -> ScalarField1D:
    """Midpoint samples of ``c0``; each adsorbing wall's ghost makes the wall average equal ``c0`` there."""
    f = c0 if callable(c0) else (lambda s: np.full_like(np.asarray(s, dtype=float), float(c0)))
    values = np.asarray(f(cfg.grid.centers), dtype=float)
    c_left = float(np.asarray(f(np.array([cfg.grid.x_min])))[0])
    c_right = float(np.asarray(f(np.array([cfg.grid.x_max])))[0])
    ghost_left = 2 * c_left - values[0] if cfg.M > 0 else values[0]
    ghost_right = 2 * c_right - values[-1] if cfg.M_right > 0 else values[-1]
    return ScalarField1D(cfg.grid, values, 0.0, ghost_left, ghost_right)


def step_multiscale_model(state: ScalarField1D, cfg: MultiscaleModelConfig) -> ScalarField1D:
    """One step of the heat equation with dynamic adsorption walls (zero-Neumann where ``M = 0``)."""
    _warn_negative(state.values, "multiscale model")
    dt = cfg.stepper.dt
    if cfg.stepper.scheme == "rk4":
        raise ValueError("use explicit-euler, implicit-euler or crank-nicolson for the PDE models")
    if cfg.stepper.scheme == "explicit-euler" and dt > cfg.explicit_dt_limit * (1 + 1e-12):
        raise ValueError(f"explicit step dt={dt:.4g} exceeds the stability bound {cfg.explicit_dt_limit:.4g}")
    u = cfg.pack(state)
    (ll, ld, lu), (rl, rd, ru) = cfg._step_system
    new = solve_tridiagonal(ll, ld, lu, _tri_matvec(rl, rd, ru, u))
    return cfg.unpack(new, state.t + dt)


def two_wall_multiscale(cfg: MultiscaleModelConfig) -> Callable[[ScalarField1D], ScalarField1D]:
    """Stepping operation for a slab with adsorbing walls at both ends."""

    def step(state: ScalarField1D) -> ScalarField1D:
        return step_multiscale_model(state, cfg)

    return step


def run_multiscale_model(state: ScalarField1D, cfg: MultiscaleModelConfig, t_end: float, callback=None):
    n = int(round((t_end - state.t) / cfg.stepper.dt))
    if n < 0 or not math.isclose(state.t + n * cfg.stepper.dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"t_end={t_end} is not reachable from t={state.t} in steps of {cfg.stepper.dt}")
    for _ in range(n):
        state = step_multiscale_model(state, cfg)
        if callback is not None:
            callback(state)
    state.t = t_end
    return state


def multiscale_diagnostics(state: ScalarField1D, cfg: MultiscaleModelConfig) -> SorptionDiagnostics:
    bulk = cfg.grid.h * float(state.values.sum())
    adsorbed = cfg.M * state.wall_value("left") + cfg.M_right * state.wall_value("right")
    return SorptionDiagnostics(state.t, bulk, adsorbed, state.wall_value("left"))


# --------------------------------------------------------------------------
# full vs. multiscale comparison


@dataclass(frozen=True)
class CompareScenario:
    """Shared setup for the epsilon study; grids follow the layer width."""

    D: float = 1.0
    phi: float = 3.0
    L: float = 2.0
    c0: Callable | float = 1.0
    output_times: tuple[float, ...] = (0.01, 0.05, 0.1)
    dt: float = 2.5e-4
    scheme: str = "implicit-euler"
    cells_per_eps: int = 20
    multiscale_cells: int = 400
    n_quad: int = 2000
    reduced_origin: str = "layer-edge"

    def __post_init__(self):
        if self.reduced_origin not in ("layer-edge", "wall"):
            raise ValueError(f"reduced_origin must be 'layer-edge' or 'wall', got {self.reduced_origin!r}")


@dataclass(frozen=True)
class CompareRow:
    eps: float
    M: float
    sup_error: float
    l2_error: float


def _sample_times(times: Sequence[float], dt: float) -> list[int]:
    steps = []
    for t in times:
        n = int(round(t / dt))
        if n <= 0 or not math.isclose(n * dt, t, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"output time {t} is not a positive multiple of dt={dt}")
        steps.append(n)
    return steps


def compare_full_vs_multiscale(eps_values: Sequence[float], sc: CompareScenario = CompareScenario()) -> list[CompareRow]:
    """Sup and L2 distance between resolved and reduced solutions on ``[L eps, 1]``.

    Norms are maxima over the output times; the resolved solution is linearly
    interpolated onto the reduced grid.  With ``reduced_origin="layer-edge"``
    the reduced model lives on ``[L eps, 1]``, so the adsorbing condition sits
    where the layer meets the bulk and both models hold the same capacity;
    ``"wall"`` puts it at ``x = 0`` and leaves an O(eps) volume mismatch.
    """
    steps = _sample_times(sc.output_times, sc.dt)
    rows = []
    for eps in eps_values:
        if not eps > 0:
            raise ValueError(f"epsilon must be positive, got {eps}")
        pot = PotentialSpec("lennard-jones", eps=eps, L=sc.L, phi=sc.phi)
        stepper = TimeStepper(sc.scheme, sc.dt)
        full = FullModelConfig(pot, sc.D, FullModelConfig.default_grid(pot, sc.cells_per_eps), stepper)
        M = compute_M(pot, sc.n_quad)
        edge = pot.layer_edge()
        origin = edge if sc.reduced_origin == "layer-edge" else 0.0
        ms = MultiscaleModelConfig(sc.D, M, Grid1D(origin, 1.0, sc.multiscale_cells), stepper)
        fs = full_model_initial_state(full, sc.c0)
        ss = multiscale_initial_state(ms, sc.c0)
        xs = ms.grid.centers
        sel = xs >= edge
        sup_err = l2_err = 0.0
        done = 0
        for target in steps:
            for _ in range(target - done):
                fs = step_full_model(fs, full)
                ss = step_multiscale_model(ss, ms)
            done = target
            cf = np.interp(xs[sel], full.grid.centers, fs.values)
            diff = cf - ss.values[sel]
            sup_err = max(sup_err, float(np.max(np.abs(diff))))
            l2_err = max(l2_err, float(np.sqrt(ms.grid.h * np.sum(diff**2))))
        rows.append(CompareRow(eps, M, sup_err, l2_err))
    return rows


# --------------------------------------------------------------------------
# eigen-series solution of the reduced model


@dataclass
class MultiscaleSeries:
    """Separation-of-variables solution of the reduced model on ``[0, 1]``.

    Modes are ``cos(mu (1 - x))`` (zero slope at ``x = 1``); the wall condition
    ``M c_t = D c_x`` gives ``sin(mu) + M mu cos(mu) = 0``.  Modes are
    orthogonal for ``<f, g> = int f g dx + M f(0) g(0)``, which is also the
    conserved total mass pairing.
    """

    M: float
    D: float

    def eigenvalues(self, n: int) -> np.ndarray:
        """Zero followed by the first ``n`` positive roots."""
        roots = [0.0]
        for j in range(1, n + 1):
            lo, hi = (j - 0.5) * math.pi, j * math.pi
            if self.M == 0:
                roots.append(hi)
                continue
            g = lambda mu: math.sin(mu) + self.M * mu * math.cos(mu)
            glo, ghi = g(lo), g(hi)
            if glo * ghi > 0:
                raise RuntimeError(f"cannot bracket eigenvalue {j} in [{lo:.6g}, {hi:.6g}]")
            roots.append(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
        return np.array(roots)

    def coefficients(self, c0: Callable, mus: np.ndarray, n_quad: int = 20000) -> np.ndarray:
        x = np.linspace(0.0, 1.0, n_quad + 1)
        f = np.asarray(c0(x), dtype=float)
        c_wall = f[0]
        coef = np.empty(mus.size)
        for i, mu in enumerate(mus):
            mode = np.cos(mu * (1.0 - x))
            num = quad_trapezoid(f * mode, 0.0, 1.0, n_quad) + self.M * c_wall * mode[0]
            norm = (0.5 + math.sin(2 * mu) / (4 * mu) if mu > 0 else 1.0) + self.M * mode[0] ** 2
            coef[i] = num / norm
        return coef

    def evaluate(self, c0: Callable, x, t: float, n_terms: int = 60) -> np.ndarray:
        mus = self.eigenvalues(n_terms)
        coef = self.coefficients(c0, mus)
        x = np.asarray(x, dtype=float)
        decay = np.exp(-self.D * mus**2 * t)
        return np.cos(np.outer(1.0 - x, mus)) @ (coef * decay)


@dataclass
class SquareSinkSolution(MultiscaleSeries):
    """Reference solution for a square well ``U = -phi`` on ``[0, L + 1]``."""

    phi: float = 0.0
    eps: float = 0.0
    L: float = 2.0


def analytic_square_sink_solution(phi: float, eps: float, D: float, L: float = 2.0) -> SquareSinkSolution:
    """Closed-form adsorption length ``eps (L + 1) e^phi`` plus the eigen-series of the reduced model."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    M = eps * (L + 1.0) * math.exp(phi)
    return SquareSinkSolution(M=M, D=D, phi=phi, eps=eps, L=L)


# --------------------------------------------------------------------------
# 2D slab with a potential varying only in x


def step_full_model_slab(values: np.ndarray, cfg: FullModelConfig, hy: float) -> np.ndarray:
    """Lie splitting for ``W(x, y) = V(x)``: each row by the 1D kernel, then y-diffusion with zero flux.

    ``values`` has shape ``(n_x, n_y)`` on cell centres; both sub-steps use the
    stepper of ``cfg`` and conserve mass exactly.
    """
    rows = np.empty_like(values)
    for j in range(values.shape[1]):
        rows[:, j] = step_full_model(ScalarField1D(cfg.grid, values[:, j]), cfg).values
    ny = values.shape[1]
    k = cfg.D / hy**2
    lower = np.full(ny, k)
    upper = np.full(ny, k)
    diag = np.full(ny, -2 * k)
    diag[0] = diag[-1] = -k
    lower[0] = upper[-1] = 0.0
    dt, th = cfg.stepper.dt, cfg.stepper.theta
    if cfg.stepper.scheme == "explicit-euler":
        if dt > hy * hy / (2 * cfg.D) * (1 + 1e-12):
            raise ValueError("explicit step violates the y-diffusion bound")
        return rows + dt * np.stack([_tri_matvec(lower, diag, upper, rows[i]) for i in range(rows.shape[0])])
    (ll, ld, lu), (rl, rd, ru) = _theta_lhs_rhs(lower, diag, upper, dt, th)
    out = np.empty_like(rows)
    for i in range(rows.shape[0]):
        out[i] = solve_tridiagonal(ll, ld, lu, _tri_matvec(rl, rd, ru, rows[i]))
    return out
