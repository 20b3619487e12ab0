"""Two-dimensional reduced sorption model around embedded bubbles.

In the fluid ``c_t = D lap(c)``; the outer square has zero-flux walls; on each
bubble surface

    M s_t = M D s_tautau + D dc/dn,

with ``s`` the surface value of ``c``, ``tau`` arclength and ``n`` the unit
normal pointing into the fluid.

Discretisation (finite volumes on the node grid):

* each fluid node owns its dual cell (halved along the outer walls);
* a grid link from a fluid node ``I`` to a bubble node is cut at fraction
  ``theta`` of its length; the interface value there enters the ghost value
  ``c_I + (s - c_I)/theta``, which turns the link flux into ``D (s - c_I)/theta``;
* surface unknowns sit on nodes equally spaced in arclength; a link's
  interface value is the hat-function interpolant of the two nearest surface
  nodes, and its flux is handed back to them with the same weights.

The resulting operator is symmetric with zero column sums, so the discrete
total ``sum(w_I c_I) + M sum(l_j s_j)`` is conserved to round-off by every
theta-scheme.  Implicit steps reuse one sparse LU factorisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .levelset import LevelSetField
from .numerics import Grid1D, TimeStepper, solve_tridiagonal
from .sorption1d import SorptionDiagnostics

__all__ = [
    "SurfaceNodes",
    "SurfaceField",
    "ScalarField2D",
    "Multiscale2DConfig",
    "laplace_beltrami_circle",
    "initial_state_2d",
    "step_multiscale_2d",
    "run_multiscale_2d",
    "total_mass_2d",
    "RadialOracle",
    "radial_oracle_solution",
]

MIN_CUT_FRACTION = 1e-3
# Without adsorption the link balance leaves some surface nodes undetermined;
# this much tangential coupling (relative to D/spacing) picks the smoothest trace.
# It is zero-sum, so conservation is untouched, and perturbs bulk fluxes at this level.
TRACE_SMOOTHING = 1e-9
MIN_LB_SAMPLES = 8


def laplace_beltrami_circle(f, R: float) -> np.ndarray:
    """``(1/R^2) f_thetatheta`` by periodic central differences on uniform angle samples."""
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < MIN_LB_SAMPLES:
        raise ValueError(f"need at least {MIN_LB_SAMPLES} samples on the circle, got {n}")
    if not R > 0:
        raise ValueError("radius must be positive")
    dtheta = 2.0 * math.pi / n
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (R * dtheta) ** 2


@dataclass(frozen=True)
class SurfaceNodes:
    """Arclength-uniform nodes on every bubble, concatenated shape by shape."""

    x: np.ndarray
    y: np.ndarray
    tau: np.ndarray
    shape: np.ndarray  # owning shape per node
    spacing: np.ndarray  # arclength spacing per shape
    offsets: np.ndarray  # start of each shape's block; offsets[-1] == total

    @classmethod
    def build(cls, shapes, h: float) -> "SurfaceNodes":
        xs, ys, taus, owner, spacing, offsets = [], [], [], [], [], [0]
        for k, s in enumerate(shapes):
            n = s.surface_spacing(h)
            ds = s.perimeter / n
            tau = ds * np.arange(n)
            px, py = s.point(tau)
            xs.append(px)
            ys.append(py)
            taus.append(tau)
            owner.append(np.full(n, k))
            spacing.append(ds)
            offsets.append(offsets[-1] + n)
        cat = lambda a, dt=float: np.concatenate(a) if a else np.zeros(0, dtype=dt)
        return cls(cat(xs), cat(ys), cat(taus), cat(owner, int), np.array(spacing), np.array(offsets))

    @property
    def size(self) -> int:
        return int(self.offsets[-1])

    @property
    def lengths(self) -> np.ndarray:
        """Arclength weight of each node."""
        return self.spacing[self.shape] if self.size else np.zeros(0)

    def hat(self, k: int, tau: float) -> tuple[tuple[int, int], tuple[float, float]]:
        """Nodes and weights of the piecewise-linear interpolant at arclength ``tau`` on shape ``k``."""
        start, stop = self.offsets[k], self.offsets[k + 1]
        n = stop - start
        q = tau / self.spacing[k]
        j0 = int(math.floor(q))
        frac = q - j0
        return (start + j0 % n, start + (j0 + 1) % n), (1.0 - frac, frac)


@dataclass
class SurfaceField:
    nodes: SurfaceNodes
    values: np.ndarray
    t: float = 0.0


@dataclass
class ScalarField2D:
    """Node values on the full grid; ``NaN`` outside the fluid."""

    values: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class Multiscale2DConfig:
    level_set: LevelSetField
    D: float
    M: float
    stepper: TimeStepper

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"diffusivity must be positive, got {self.D}")
        if self.M < 0:
            raise ValueError(f"adsorption length must be >= 0, got {self.M}")

    @property
    def grid(self):
        return self.level_set.grid

    @cached_property
    def surface(self) -> SurfaceNodes:
        return SurfaceNodes.build(self.level_set.shapes, min(self.grid.hx, self.grid.hy))

    @cached_property
    def fluid_index(self) -> np.ndarray:
        """Unknown number of each fluid node, -1 elsewhere."""
        fluid = self.level_set.fluid
        idx = -np.ones(fluid.shape, dtype=int)
        idx[fluid] = np.arange(int(fluid.sum()))
        return idx

    @cached_property
    def n_bulk(self) -> int:
        return int(self.level_set.fluid.sum())

    @cached_property
    def bulk_weights(self) -> np.ndarray:
        nx, ny = self.grid.shape
        wx = np.full(nx, self.grid.hx)
        wy = np.full(ny, self.grid.hy)
        wx[[0, -1]] *= 0.5
        wy[[0, -1]] *= 0.5
        return np.outer(wx, wy)[self.level_set.fluid]

    @cached_property
    def weights(self) -> np.ndarray:
        """Diagonal of the mass matrix: dual-cell areas, then ``M`` times arclength weights."""
        return np.concatenate([self.bulk_weights, self.M * self.surface.lengths])

    @cached_property
    def cut_links(self) -> list[tuple[int, int, float, float, float]]:
        """``(bulk unknown, shape, theta, conductance, arclength)`` for every fluid-to-bubble link."""
        ls = self.level_set
        grid = self.grid
        xs, ys = grid.x.nodes, grid.y.nodes
        nx, ny = grid.shape
        fluid = ls.fluid
        idx = self.fluid_index
        links = []
        for i, j in np.argwhere(fluid):
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if not (0 <= a < nx and 0 <= b < ny) or fluid[a, b]:
                    continue
                x0, y0 = xs[i], ys[j]
                x1, y1 = xs[a], ys[b]
                f = lambda t: float(ls.phi(x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
                theta = brentq(f, 0.0, 1.0, xtol=1e-14, rtol=1e-14) if ls.values[a, b] > 0 else 1.0
                px, py = x0 + theta * (x1 - x0), y0 + theta * (y1 - y0)
                k = ls.owner(px, py)
                tau = float(ls.shapes[k].arclength_of(px, py))
                if di:
                    face = grid.hy * (0.5 if j in (0, ny - 1) else 1.0) / grid.hx
                else:
                    face = grid.hx * (0.5 if i in (0, nx - 1) else 1.0) / grid.hy
                cond = self.D * face / max(theta, MIN_CUT_FRACTION)
                links.append((int(idx[i, j]), k, theta, cond, tau))
        return links

    @cached_property
    def operator(self) -> sp.csr_matrix:
        """Symmetric operator ``A`` of ``W u' = A u`` on ``[bulk nodes, surface nodes]``."""
        nb = self.n_bulk
        surf = self.surface
        n = nb + surf.size
        rows, cols, vals = [], [], []

        def couple(p, q, g):
            rows.extend((p, q, p, q))
            cols.extend((p, q, q, p))
            vals.extend((-g, -g, g, g))

        fluid = self.level_set.fluid
        idx = self.fluid_index
        gx, gy = self.grid.hx, self.grid.hy
        nx, ny = fluid.shape
        # fluid-fluid links with dual-cell face lengths (halved along walls)
        face_y = np.full(ny, gy)
        face_y[[0, -1]] *= 0.5
        face_x = np.full(nx, gx)
        face_x[[0, -1]] *= 0.5
        pair_x = fluid[:-1, :] & fluid[1:, :]
        for i, j in np.argwhere(pair_x):
            couple(idx[i, j], idx[i + 1, j], self.D * face_y[j] / gx)
        pair_y = fluid[:, :-1] & fluid[:, 1:]
        for i, j in np.argwhere(pair_y):
            couple(idx[i, j], idx[i, j + 1], self.D * face_x[i] / gy)
        # cut links: flux g (s(tau) - c_I), s(tau) = sum_j w_j s_j
        for bulk, k, _, g, tau in self.cut_links:
            (j0, j1), (w0, w1) = surf.hat(k, tau)
            sj = (nb + j0, nb + j1)
            ws = (w0, w1)
            rows.append(bulk)
            cols.append(bulk)
            vals.append(-g)
            for s_node, w in zip(sj, ws):
                rows.extend((bulk, s_node))
                cols.extend((s_node, bulk))
                vals.extend((g * w, g * w))
                for s_other, w_other in zip(sj, ws):
                    rows.append(s_node)
                    cols.append(s_other)
                    vals.append(-g * w * w_other)
        # surface diffusion M D s_tautau along each closed curve
        tangential = self.M if self.M > 0 else TRACE_SMOOTHING
        for k in range(len(self.level_set.shapes)):
            start, stop = surf.offsets[k], surf.offsets[k + 1]
            g = tangential * self.D / surf.spacing[k]
            for j in range(start, stop):
                nxt = start + (j - start + 1) % (stop - start)
                couple(nb + j, nb + nxt, g)
        return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    @cached_property
    def algebraic_rows(self) -> np.ndarray:
        return self.weights == 0

    @cached_property
    def explicit_dt_limit(self) -> float:
        diag = -self.operator.diagonal()[: self.n_bulk]
        return float(np.min(self.bulk_weights / np.maximum(diag, 1e-300)))

    @cached_property
    def _factorized(self):
        A = self.operator
        n = A.shape[0]
        dt, th = self.stepper.dt, self.stepper.theta
        W = sp.diags(self.weights)
        keep = sp.diags((~self.algebraic_rows).astype(float))
        alg = sp.diags(self.algebraic_rows.astype(float))
        if self.stepper.scheme == "explicit-euler":
            nb = self.n_bulk
            Ass = A[nb:, nb:]
            Ws = sp.diags(self.weights[nb:])
            ks = sp.diags((~self.algebraic_rows[nb:]).astype(float))
            al = sp.diags(self.algebraic_rows[nb:].astype(float))
            lhs = (ks @ (Ws - dt * Ass) + al @ Ass).tocsc()
            return splu(lhs) if lhs.shape[0] else None, None
        lhs = (keep @ (W - th * dt * A) + alg @ A).tocsc()
        rhs = (keep @ (W + (1 - th) * dt * A)).tocsr()
        return splu(lhs), rhs

    def pack(self, state: ScalarField2D, surface: SurfaceField) -> np.ndarray:
        return np.concatenate([state.values[self.level_set.fluid], surface.values])

    def unpack(self, u: np.ndarray, t: float) -> tuple[ScalarField2D, SurfaceField]:
        full = np.full(self.grid.shape, np.nan)
        full[self.level_set.fluid] = u[: self.n_bulk]
        return ScalarField2D(full, t), SurfaceField(self.surface, u[self.n_bulk :].copy(), t)


def initial_state_2d(cfg: Multiscale2DConfig, c0: Callable | float) -> tuple[ScalarField2D, SurfaceField]:
    """Sample ``c0(x, y)`` on fluid nodes and surface nodes.

    Without adsorption the surface values are slaved to the bulk, so they are
    solved for instead of sampled.
    """
    f = c0 if callable(c0) else (lambda x, y: np.full(np.broadcast(x, y).shape, float(c0)))
    X, Y = cfg.grid.mesh()
    bulk = np.full(cfg.grid.shape, np.nan)
    fl = cfg.level_set.fluid
    bulk[fl] = np.asarray(f(X[fl], Y[fl]), dtype=float)
    surf = cfg.surface
    s = np.asarray(f(surf.x, surf.y), dtype=float) if surf.size else np.zeros(0)
    if cfg.M == 0 and surf.size:
        nb = cfg.n_bulk
        A = cfg.operator
        Ass = A[nb:, nb:].tocsc()
        rhs = -(A[nb:, :nb] @ bulk[fl])
        s = splu(Ass).solve(rhs)
    return ScalarField2D(bulk), SurfaceField(surf, s)


def step_multiscale_2d(
    state: ScalarField2D, surface: SurfaceField, cfg: Multiscale2DConfig
) -> tuple[ScalarField2D, SurfaceField]:
    """One conservative step; implicit schemes solve the coupled bulk-surface system."""
    u = cfg.pack(state, surface)
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("non-finite values in the 2D state")
    dt = cfg.stepper.dt
    lu, rhs = cfg._factorized
    if cfg.stepper.scheme == "rk4":
        raise ValueError("use explicit-euler, implicit-euler or crank-nicolson for the 2D model")
    if cfg.stepper.scheme == "explicit-euler":
        if dt > cfg.explicit_dt_limit * (1 + 1e-12):
            raise ValueError(f"explicit step dt={dt:.4g} exceeds the stability bound {cfg.explicit_dt_limit:.4g}")
        # surface first (implicitly, with the old bulk), then the bulk with the new surface;
        # this ordering keeps the update conservative
        nb = cfg.n_bulk
        A = cfg.operator
        c, s = u[:nb], u[nb:]
        if s.size:
            alg = cfg.algebraic_rows[nb:]
            b = np.where(alg, 0.0, cfg.weights[nb:] * s) + np.where(alg, -1.0, dt) * (A[nb:, :nb] @ c)
            s = lu.solve(b)
        c = c + dt * (A[:nb, :nb] @ c + A[:nb, nb:] @ s) / cfg.bulk_weights
        new = np.concatenate([c, s])
    else:
        new = lu.solve(rhs @ u)
    return cfg.unpack(new, state.t + dt)


def run_multiscale_2d(state, surface, cfg: Multiscale2DConfig, t_end: float, callback=None):
    n = int(round((t_end - state.t) / cfg.stepper.dt))
    if n < 0 or not math.isclose(state.t + n * cfg.stepper.dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"t_end={t_end} is not reachable from t={state.t} in steps of {cfg.stepper.dt}")
    for _ in range(n):
        state, surface = step_multiscale_2d(state, surface, cfg)
        if callback is not None:
            callback(state, surface)
    return state, surface


def total_mass_2d(state: ScalarField2D, surface: SurfaceField, cfg: Multiscale2DConfig) -> SorptionDiagnostics:
    """Bulk mass, adsorbed mass ``M * int s dtau`` and the mean surface concentration."""
    bulk = float(np.sum(cfg.bulk_weights * state.values[cfg.level_set.fluid]))
    lengths = cfg.surface.lengths
    line = float(np.sum(lengths * surface.values)) if lengths.size else 0.0
    mean_s = line / float(lengths.sum()) if lengths.size else float("nan")
    return SorptionDiagnostics(state.t, bulk, cfg.M * line, mean_s)


# --------------------------------------------------------------------------
# radially symmetric reference


@dataclass
class RadialOracle:
    r: np.ndarray
    c: np.ndarray
    surface: float

    def __call__(self, radius) -> np.ndarray:
        return np.interp(radius, self.r, self.c)


def radial_oracle_solution(
    R_b: float,
    R_out: float,
    D: float,
    M: float,
    g: Callable,
    t_end: float,
    stepper: TimeStepper,
    n_cells: int = 2000,
) -> RadialOracle:
    """Annulus ``R_b < r < R_out`` with ``c_t = (D/r)(r c_r)_r``, zero flux at ``R_out``
    and the adsorbing condition at ``R_b``.

    Cell-centred finite volumes with a ghost cell inside the bubble, so the
    wall value is ``(g + c_1)/2`` exactly as in the 1D reduced model.
    """
    if not (0 < R_b < R_out):
        raise ValueError("need 0 < R_b < R_out")
    grid = Grid1D(R_b, R_out, n_cells)
    h = grid.h
    r = grid.centers
    faces = grid.edges
    size = n_cells + 2
    a_lo, a_di, a_up = np.zeros(size), np.zeros(size), np.zeros(size)
    b_lo, b_di, b_up = np.zeros(size), np.zeros(size), np.zeros(size)
    k = D / h
    # row i (1..N) is cell i-1: d/dt (r h c) = D [r_+ (c_+ - c)/h - r_- (c - c_-)/h]
    for i in range(1, n_cells + 1):
        rm, rp = faces[i - 1], faces[i]
        b_di[i] = r[i - 1] * h
        if i > 1 or M > 0:
            a_lo[i] = k * rm
            a_di[i] -= k * rm
        if i < n_cells:
            a_up[i] = k * rp
            a_di[i] -= k * rp
    if M > 0:
        # M R_b d/dt (g + c1)/2 = D R_b (c1 - g)/h
        b_di[0] = b_up[0] = 0.5 * M * R_b
        a_di[0], a_up[0] = -k * R_b, k * R_b
    dt, th = stepper.dt, stepper.theta
    if not stepper.implicit:
        raise ValueError("the radial oracle uses implicit-euler or crank-nicolson")
    lhs = [b_lo - th * dt * a_lo, b_di - th * dt * a_di, b_up - th * dt * a_up]
    rhs = [b_lo + (1 - th) * dt * a_lo, b_di + (1 - th) * dt * a_di, b_up + (1 - th) * dt * a_up]
    # outer ghost is unused (zero flux is built into the last row); pin it
    lhs[0][-1], lhs[1][-1], lhs[2][-1] = 0.0, 1.0, 0.0
    for arr in rhs:
        arr[-1] = 0.0
    if M == 0:
        lhs[1][0], lhs[2][0] = 1.0, -1.0
        for arr in rhs:
            arr[0] = 0.0
    u = np.zeros(size)
    u[1:-1] = g(r)
    u[0] = 2.0 * float(g(np.array([R_b]))[0]) - u[1] if M > 0 else u[1]
    n_steps = int(round(t_end / dt))
    if not math.isclose(n_steps * dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("t_end must be a multiple of dt")
    for _ in range(n_steps):
        b = rhs[1] * u
        b[1:] += rhs[0][1:] * u[:-1]
        b[:-1] += rhs[2][:-1] * u[1:]
        u = solve_tridiagonal(lhs[0], lhs[1], lhs[2], b)
    return RadialOracle(np.concatenate([[R_b], r]), np.concatenate([[0.5 * (u[0] + u[1])], u[1:-1]]), 0.5 * (u[0] + u[1]))
