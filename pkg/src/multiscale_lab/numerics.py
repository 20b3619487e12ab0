"""Shared numerical kernels: uniform grids, quadrature, tridiagonal solves, ODE steppers.

Everything here is a pure function of its inputs, so the model modules can
call these kernels from concurrent simulations without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid1D",
    "Grid2D",
    "TimeStepper",
    "SCHEMES",
    "SingularSystemError",
    "ConvergenceError",
    "quad_trapezoid",
    "solve_tridiagonal",
    "step_ode",
    "integrate_ode",
    "observed_order",
]

SCHEMES = ("explicit-euler", "rk4", "implicit-euler", "crank-nicolson")

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class SingularSystemError(ArithmeticError):
    """A zero pivot was met while eliminating a tridiagonal system."""


class ConvergenceError(RuntimeError):
    """An implicit step failed to converge; carries the residual history."""

    def __init__(self, message: str, residuals: Sequence[float]):
        super().__init__(f"{message} (residuals: {', '.join(f'{r:.3e}' for r in residuals[-5:])})")
        self.residuals = list(residuals)


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[x_min, x_max]`` split into ``n_cells`` cells.

    ``layout`` selects where the unknowns live: ``"centers"`` gives the
    ``n_cells`` cell midpoints, ``"edges"`` gives the ``n_cells + 1`` cell
    boundaries.
    """

    x_min: float
    x_max: float
    n_cells: int
    layout: str = "centers"

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be >= 2, got {self.n_cells}")
        if self.layout not in ("centers", "edges"):
            raise ValueError(f"unknown layout {self.layout!r}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def edges(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.h * (np.arange(self.n_cells) + 0.5)

    @property
    def nodes(self) -> np.ndarray:
        return self.centers if self.layout == "centers" else self.edges

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of two node-based (``layout="edges"``) axes."""

    x: Grid1D
    y: Grid1D

    def __post_init__(self):
        for axis in (self.x, self.y):
            if len(axis) < 3:
                raise ValueError("Grid2D needs at least 3 nodes per axis")

    @classmethod
    def square(cls, lo: float, hi: float, n_cells: int) -> "Grid2D":
        axis = Grid1D(lo, hi, n_cells, layout="edges")
        return cls(axis, axis)

    @property
    def hx(self) -> float:
        return self.x.h

    @property
    def hy(self) -> float:
        return self.y.h

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.x), len(self.y))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates with ``indexing="ij"`` (first index is x)."""
        return np.meshgrid(self.x.nodes, self.y.nodes, indexing="ij")


@dataclass(frozen=True)
class TimeStepper:
    scheme: str
    dt: float
    newton_tol: float = field(default=NEWTON_TOL)
    newton_max_iter: int = field(default=NEWTON_MAX_ITER)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")

    @property
    def implicit(self) -> bool:
        return self.scheme in ("implicit-euler", "crank-nicolson")

    @property
    def theta(self) -> float:
        """Implicitness weight of the one-step theta method this scheme belongs to."""
        return {"explicit-euler": 0.0, "implicit-euler": 1.0, "crank-nicolson": 0.5}[self.scheme]


def quad_trapezoid(f, a: float, b: float, n: int) -> float:
    """Composite trapezoid estimate of the integral of ``f`` over ``[a, b]``.

    ``f`` is either a vectorised callable or an array of ``n + 1`` samples at
    equally spaced points including both ends.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 subintervals, got {n}")
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    if callable(f):
        samples = np.asarray(f(np.linspace(a, b, n + 1)), dtype=float)
        if samples.shape == ():
            samples = np.full(n + 1, float(samples))
    else:
        samples = np.asarray(f, dtype=float)
        if samples.shape != (n + 1,):
            raise ValueError(f"expected {n + 1} samples, got shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise ValueError("integrand has non-finite samples")
    h = (b - a) / n
    return float(h * (samples.sum() - 0.5 * (samples[0] + samples[-1])))


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system by the Thomas recurrence.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` and ``upper[i]`` multiplies
    ``x[i+1]``; ``lower[0]`` and ``upper[-1]`` are ignored.  All four sequences
    have the system size ``n``.  No pivoting is done, so the matrix should be
    diagonally dominant or otherwise safe for LU without row exchanges.
    """
    # plain float lists: the recurrence is sequential and this is several
    # times faster than indexing numpy arrays element by element
    a = [float(v) for v in lower]
    b = [float(v) for v in diag]
    c = [float(v) for v in upper]
    d = [float(v) for v in rhs]
    n = len(b)
    if not (len(a) == len(c) == len(d) == n):
        raise ValueError("lower, diag, upper and rhs must have equal length")
    if n == 0:
        return np.zeros(0)
    cp = [0.0] * n
    dp = [0.0] * n
    piv = b[0]
    if piv == 0.0:
        raise SingularSystemError("zero pivot in row 0")
    cp[0] = c[0] / piv
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i] * cp[i - 1]
        if piv == 0.0:
            raise SingularSystemError(f"zero pivot in row {i}")
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def _jacobian_fd(f, t, y, fy):
    n = y.size
    jac = np.empty((n, n))
    for j in range(n):
        step = 1e-7 * max(1.0, abs(y[j]))
        yp = y.copy()
        yp[j] += step
        jac[:, j] = (np.asarray(f(t, yp), dtype=float) - fy) / step
    return jac


def _theta_step(f, y, t, dt, theta, tol, max_iter, jac):
    """Newton iteration for y1 = y + dt[(1-theta) f(t, y) + theta f(t+dt, y1)]."""
    explicit_part = y + dt * (1.0 - theta) * np.asarray(f(t, y), dtype=float) if theta < 1 else y.copy()
    t1 = t + dt
    y1 = y.copy()
    residuals = []
    eye = np.eye(y.size)
    for _ in range(max_iter):
        f1 = np.asarray(f(t1, y1), dtype=float)
        g = y1 - explicit_part - dt * theta * f1
        res = float(np.max(np.abs(g))) if g.size else 0.0
        residuals.append(res)
        if res <= tol * max(1.0, float(np.max(np.abs(y1)))):
            return y1
        j = jac(t1, y1) if jac is not None else _jacobian_fd(f, t1, y1, f1)
        y1 = y1 - np.linalg.solve(eye - dt * theta * np.asarray(j, dtype=float), g)
        if not np.all(np.isfinite(y1)):
            break
    raise ConvergenceError(
        f"implicit step at t={t:.6g} (dt={dt:.3g}) did not converge in {max_iter} iterations",
        residuals,
    )


def step_ode(f: Callable, y, t: float, stepper: TimeStepper, jac: Callable | None = None) -> np.ndarray:
    """Advance ``y' = f(t, y)`` by one step of ``stepper``.

    ``jac(t, y)`` is used by the implicit schemes when given; otherwise the
    Jacobian is approximated by forward differences.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    dt = stepper.dt
    f0 = np.asarray(f(t, y), dtype=float)
    if not np.all(np.isfinite(f0)):
        raise FloatingPointError(f"right-hand side is not finite at t={t}")
    if stepper.scheme == "explicit-euler":
        return y + dt * f0
    if stepper.scheme == "rk4":
        k1 = f0
        k2 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
        k3 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
        k4 = np.asarray(f(t + dt, y + dt * k3), dtype=float)
        return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _theta_step(f, y, t, dt, stepper.theta, stepper.newton_tol, stepper.newton_max_iter, jac)


def integrate_ode(f: Callable, y0, t_end: float, stepper: TimeStepper, jac: Callable | None = None):
    """Fixed-step integration from t=0 to ``t_end``; the last step is shortened to land on it.

    Returns ``(t, y)`` with ``y[i]`` the state at ``t[i]``.
    """
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    n_steps = max(1, int(np.ceil(t_end / stepper.dt - 1e-9)))
    ts = np.empty(n_steps + 1)
    ys = np.empty((n_steps + 1, y.size))
    ts[0], ys[0] = 0.0, y
    t = 0.0
    full = stepper
    for i in range(1, n_steps + 1):
        dt = min(stepper.dt, t_end - t)
        st = full if dt == full.dt else TimeStepper(full.scheme, dt, full.newton_tol, full.newton_max_iter)
        y = step_ode(f, y, t, st, jac)
        t = t_end if i == n_steps else t + dt
        ts[i], ys[i] = t, y
    return ts, ys


def observed_order(sizes, errors) -> float:
    """Least-squares slope of log(error) against log(size)."""
    sizes = np.asarray(sizes, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if sizes.size < 2:
        raise ValueError("need at least two points to measure an order")
    slope, _ = np.polyfit(np.log(sizes), np.log(errors), 1)
    return float(slope)
