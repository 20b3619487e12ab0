"""Damped harmonic oscillator, its overdamped limit, and the stiff-spring pendulum.

The oscillator is ``m x'' = -k x - gamma x'``.  Its time scales are

* ``t0 = sqrt(m/k)``: inverse angular frequency,
* ``td = m/gamma``: decay time due to damping,
* ``tg = gamma/k``: relaxation time of the overdamped limit,

with ``td * tg == t0**2``.  As ``t0/tg -> 0`` the system relaxes to the
differential-algebraic pair ``x' = v, x + tg v = 0``.

The pendulum hangs from a spring of rest length ``L`` and stiffness ``k``; the
``x2`` axis points down.  As ``k`` grows the motion approaches the rigid
pendulum ``L theta'' + g sin(theta) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import TimeStepper, integrate_ode, quad_trapezoid

__all__ = [
    "OscillatorParams",
    "OscillatorRegime",
    "PendulumParams",
    "PendulumTrajectory",
    "RigidTrajectory",
    "classify_regime",
    "analytic_solution",
    "oscillator_rhs",
    "overdamped_limit_solution",
    "overdamped_limit_velocity",
    "simulate_stiff_pendulum",
    "simulate_rigid_pendulum",
    "rigid_period_elliptic",
    "measure_period",
    "CRITICAL_TOL",
]

CRITICAL_TOL = 1e-12


class OscillatorRegime(str, Enum):
    UNDERDAMPED = "underdamped"
    CRITICAL = "critical"
    OVERDAMPED = "overdamped"
    UNDAMPED = "undamped"
    NO_SPRING = "no-spring"


@dataclass(frozen=True)
class OscillatorParams:
    m: float
    k: float
    gamma: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.k < 0:
            raise ValueError(f"spring constant must be >= 0, got {self.k}")
        if self.gamma < 0:
            raise ValueError(f"damping must be >= 0, got {self.gamma}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.k / self.m)

    @property
    def gamma_tilde(self) -> float:
        return self.gamma / self.m

    @property
    def t0(self) -> float | None:
        return 1.0 / self.omega if self.k > 0 else None

    @property
    def td(self) -> float | None:
        return self.m / self.gamma if self.gamma > 0 else None

    @property
    def tg(self) -> float | None:
        return self.gamma / self.k if self.k > 0 and self.gamma > 0 else None

    @property
    def f(self) -> float | None:
        """Nondimensional damping ``t0/td = gamma/sqrt(m k)``; critical at 2."""
        if self.k > 0 and self.gamma > 0:
            return self.gamma / math.sqrt(self.m * self.k)
        return None

    @property
    def discriminant(self) -> float:
        return self.gamma_tilde**2 - 4.0 * self.k / self.m

    def natural_time(self) -> float:
        """A time unit for plotting/integration windows: t0, else td, else 1."""
        return self.t0 or self.td or 1.0


def classify_regime(p: OscillatorParams) -> OscillatorRegime:
    if p.k == 0:
        return OscillatorRegime.NO_SPRING
    if p.gamma == 0:
        return OscillatorRegime.UNDAMPED
    disc = p.discriminant
    if abs(disc) <= CRITICAL_TOL * p.gamma_tilde**2:
        return OscillatorRegime.CRITICAL
    return OscillatorRegime.UNDERDAMPED if disc < 0 else OscillatorRegime.OVERDAMPED


def analytic_solution(p: OscillatorParams, x0: float, v0: float, t):
    """Closed-form ``(x(t), v(t))`` for every regime; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    regime = classify_regime(p)
    gt = p.gamma_tilde
    if regime is OscillatorRegime.NO_SPRING:
        if p.gamma == 0:
            return x0 + v0 * t, np.full_like(t, v0)
        decay = np.exp(-gt * t)
        return x0 - v0 / gt * (decay - 1.0), v0 * decay
    if regime is OscillatorRegime.UNDAMPED:
        w = p.omega
        c, s = np.cos(w * t), np.sin(w * t)
        return x0 * c + v0 / w * s, -x0 * w * s + v0 * c
    if regime is OscillatorRegime.CRITICAL:
        lam = -0.5 * gt
        b = v0 - lam * x0
        e = np.exp(lam * t)
        return (x0 + b * t) * e, (b + lam * (x0 + b * t)) * e
    if regime is OscillatorRegime.UNDERDAMPED:
        wd = 0.5 * math.sqrt(-p.discriminant)
        sigma = -0.5 * gt
        a = x0
        b = (v0 - sigma * x0) / wd
        e = np.exp(sigma * t)
        c, s = np.cos(wd * t), np.sin(wd * t)
        x = e * (a * c + b * s)
        v = e * ((sigma * a + wd * b) * c + (sigma * b - wd * a) * s)
        return x, v
    # overdamped: two real negative roots; the form below avoids cancellation
    # in the slow root when gamma_tilde >> omega
    root = math.sqrt(p.discriminant)
    lam_fast = -0.5 * (gt + root)
    lam_slow = (p.k / p.m) / lam_fast
    a_slow = (v0 - lam_fast * x0) / (lam_slow - lam_fast)
    a_fast = x0 - a_slow
    e_s, e_f = np.exp(lam_slow * t), np.exp(lam_fast * t)
    return a_slow * e_s + a_fast * e_f, lam_slow * a_slow * e_s + lam_fast * a_fast * e_f


def oscillator_rhs(p: OscillatorParams):
    """Right-hand side of the first-order system ``x' = v, m v' = -k x - gamma v``."""
    k_m, g_m = p.k / p.m, p.gamma / p.m

    def rhs(t, y):
        return np.array([y[1], -k_m * y[0] - g_m * y[1]])

    return rhs


def overdamped_limit_solution(tg: float, x0: float, t):
    """Position of the limit system ``x' = v, x + tg v = 0``."""
    if not tg > 0:
        raise ValueError(f"tg must be positive, got {tg}")
    return x0 * np.exp(-np.asarray(t, dtype=float) / tg)


def overdamped_limit_velocity(tg: float, x: float | np.ndarray):
    """Velocity slaved to the position by the algebraic constraint."""
    return -np.asarray(x, dtype=float) / tg


# --------------------------------------------------------------------------
# pendulum


@dataclass(frozen=True)
class PendulumParams:
    m: float
    L: float
    k: float
    g: float = 9.81
    theta0: float = math.radians(30.0)

    def __post_init__(self):
        for name in ("m", "L", "k", "g"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pendulum {name} must be positive, got {getattr(self, name)}")

    @property
    def spring_period(self) -> float:
        return 2.0 * math.pi * math.sqrt(self.m / self.k)

    def default_stepper(self) -> TimeStepper:
        return TimeStepper("rk4", self.spring_period / 40.0)


@dataclass
class PendulumTrajectory:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    L: float
    k: float

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x1, self.x2)

    @property
    def theta(self) -> np.ndarray:
        return np.arctan2(self.x1, self.x2)

    @property
    def constraint_violation(self) -> np.ndarray:
        return np.abs(self.radius - self.L)

    @property
    def max_constraint_violation(self) -> float:
        return float(self.constraint_violation.max())

    @property
    def tension(self) -> np.ndarray:
        """Spring tension per unit length, ``k (1 - L/r)``; tends to the rigid-limit multiplier."""
        return self.k * (1.0 - self.L / self.radius)

    def rows(self):
        th, cv, lam = self.theta, self.constraint_violation, self.tension
        for i in range(self.t.size):
            yield (self.t[i], self.x1[i], self.x2[i], th[i], cv[i], lam[i])


@dataclass
class RigidTrajectory:
    t: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    L: float
    g: float

    @property
    def energy(self) -> np.ndarray:
        """Energy per unit mass, ``L^2 theta'^2 / 2 - g L cos(theta)``."""
        return 0.5 * self.L**2 * self.omega**2 - self.g * self.L * np.cos(self.theta)

    @property
    def energy_drift(self) -> float:
        e = self.energy
        return float(np.max(np.abs(e - e[0])))


def _check_spring_resolution(p: PendulumParams, stepper: TimeStepper):
    steps = p.spring_period / stepper.dt
    if steps < 20:
        raise ValueError(
            f"dt={stepper.dt:.3g} under-resolves the spring period {p.spring_period:.3g} "
            f"({steps:.1f} steps per period, need >= 20)"
        )


def simulate_stiff_pendulum(
    p: PendulumParams,
    stepper: TimeStepper | None,
    t_end: float,
    start: str = "natural",
) -> PendulumTrajectory:
    """Integrate the spring pendulum from rest at angle ``theta0``.

    ``start="natural"`` puts the mass at distance ``L`` (spring unstretched);
    ``start="balanced"`` stretches the spring so its force balances the radial
    component of gravity, ``r = L + m g cos(theta0)/k``.
    """
    stepper = stepper or p.default_stepper()
    _check_spring_resolution(p, stepper)
    if start == "natural":
        r0 = p.L
    elif start == "balanced":
        r0 = p.L + p.m * p.g * math.cos(p.theta0) / p.k
    else:
        raise ValueError(f"unknown start {start!r}")
    k_m, g, L = p.k / p.m, p.g, p.L

    def rhs(t, y):
        x1, x2, v1, v2 = y
        stretch = k_m * (1.0 - L / math.hypot(x1, x2))
        return np.array([v1, v2, -stretch * x1, -stretch * x2 + g])

    y0 = [r0 * math.sin(p.theta0), r0 * math.cos(p.theta0), 0.0, 0.0]
    t, y = integrate_ode(rhs, y0, t_end, stepper)
    return PendulumTrajectory(t, y[:, 0], y[:, 1], p.L, p.k)


def simulate_rigid_pendulum(
    L: float, g: float, theta0: float, stepper: TimeStepper, t_end: float, omega0: float = 0.0
) -> RigidTrajectory:
    if not (L > 0 and g > 0):
        raise ValueError("L and g must be positive")
    g_L = g / L

    def rhs(t, y):
        return np.array([y[1], -g_L * math.sin(y[0])])

    t, y = integrate_ode(rhs, [theta0, omega0], t_end, stepper)
    return RigidTrajectory(t, y[:, 0], y[:, 1], L, g)


def rigid_period_elliptic(L: float, g: float, theta0: float, n: int = 256) -> float:
    """Period ``4 sqrt(L/g) K(sin(theta0/2))`` with K by trapezoid quadrature.

    The integrand of K is smooth and even about both ends of ``[0, pi/2]``, so
    the trapezoid rule converges spectrally.
    """
    kk = math.sin(0.5 * theta0) ** 2
    big_k = quad_trapezoid(lambda s: 1.0 / np.sqrt(1.0 - kk * np.sin(s) ** 2), 0.0, 0.5 * math.pi, n)
    return 4.0 * math.sqrt(L / g) * big_k


def measure_period(t: np.ndarray, theta: np.ndarray) -> float:
    """Mean period from linearly interpolated downward zero crossings of ``theta``."""
    idx = np.nonzero((theta[:-1] > 0) & (theta[1:] <= 0))[0]
    if idx.size < 2:
        raise ValueError("fewer than two downward zero crossings; run longer")
    frac = theta[idx] / (theta[idx] - theta[idx + 1])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    return float(np.mean(np.diff(crossings)))
