"""Shallow-water fluxes, rotations and Riemann solvers, plus the 1D channel update.

Conserved variables are ``[h, hu]`` in 1D and ``Q = [h, hu, hv]`` in 2D.
Channels have unit width and a flat bottom unless a slope is given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "G_DEFAULT",
    "H_DRY",
    "CFL_DEFAULT",
    "sw_flux_1d",
    "sw_flux_2d",
    "rotation_matrix",
    "rotate_state",
    "rotational_invariance_check",
    "hll_flux",
    "riemann_hll",
    "rotated_hll_flux",
    "ExactRiemannSolution",
    "exact_riemann",
    "ChannelState",
    "wave_speed_bound",
    "channel_dt_limit",
    "step_channel",
    "channel_velocity_from_2d",
]

G_DEFAULT = 9.81
H_DRY = 1e-8
CFL_DEFAULT = 0.45
NEGATIVE_DEPTH_TOL = 1e-12


def _check_depth(h):
    h = np.asarray(h, dtype=float)
    if np.any(h < -NEGATIVE_DEPTH_TOL):
        raise ValueError(f"negative water depth {float(np.min(h)):.3e}")
    return np.maximum(h, 0.0)


def _velocity(h, hu):
    h = np.asarray(h, dtype=float)
    wet = h > H_DRY
    return np.where(wet, np.asarray(hu, dtype=float) / np.where(wet, h, 1.0), 0.0)


def sw_flux_1d(q, g: float = G_DEFAULT) -> np.ndarray:
    """``[hu, hu^2 + g h^2 / 2]``; dry cells carry no flux."""
    q = np.asarray(q, dtype=float)
    h = _check_depth(q[0])
    u = _velocity(h, q[1])
    wet = h > H_DRY
    return np.array([np.where(wet, h * u, 0.0), np.where(wet, h * u * u + 0.5 * g * h * h, 0.0)])


def sw_flux_2d(q, g: float = G_DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """x- and y-fluxes ``F(Q), G(Q)`` of the 2D system."""
    q = np.asarray(q, dtype=float)
    h = _check_depth(q[0])
    u = _velocity(h, q[1])
    v = _velocity(h, q[2])
    p = 0.5 * g * h * h
    F = np.array([h * u, h * u * u + p, h * u * v])
    G = np.array([h * v, h * u * v, h * v * v + p])
    return F, G


def rotation_matrix(theta: float) -> np.ndarray:
    """``T(theta)``: keeps ``h``, rotates the momentum into (normal, tangential) components."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def rotate_state(q, theta: float, inverse: bool = False) -> np.ndarray:
    """``T(theta) q``, or ``T(theta)^{-1} q = T(theta)^T q`` with ``inverse=True``."""
    q = np.asarray(q, dtype=float)
    c, s = math.cos(theta), math.sin(theta)
    if inverse:
        s = -s
    return np.array([q[0], c * q[1] + s * q[2], -s * q[1] + c * q[2]])


def rotational_invariance_check(q, theta: float, g: float = G_DEFAULT) -> float:
    """``max |cos F(q) + sin G(q) - T^{-1} F(T q)|``, zero up to round-off."""
    F, G = sw_flux_2d(q, g)
    lhs = math.cos(theta) * F + math.sin(theta) * G
    rhs = rotate_state(sw_flux_2d(rotate_state(q, theta), g)[0], theta, inverse=True)
    return float(np.max(np.abs(lhs - rhs)))


def hll_flux(hL, huL, hR, huR, g: float = G_DEFAULT):
    """Vectorised HLL flux with two-rarefaction wave-speed estimates.

    Returns ``(F_h, F_hu)`` arrays broadcast from the inputs.
    """
    hL = _check_depth(hL)
    hR = _check_depth(hR)
    uL = _velocity(hL, huL)
    uR = _velocity(hR, huR)
    aL = np.sqrt(g * hL)
    aR = np.sqrt(g * hR)
    a_star = np.maximum(0.5 * (aL + aR) + 0.25 * (uL - uR), 0.0)
    u_star = 0.5 * (uL + uR) + aL - aR
    dryL = hL <= H_DRY
    dryR = hR <= H_DRY
    sL = np.minimum(uL - aL, u_star - a_star)
    sR = np.maximum(uR + aR, u_star + a_star)
    sL = np.where(dryL, uR - 2.0 * aR, sL)
    sR = np.where(dryL, uR + aR, sR)
    sL = np.where(dryR & ~dryL, uL - aL, sL)
    sR = np.where(dryR & ~dryL, uL + 2.0 * aL, sR)
    wetL = ~dryL
    wetR = ~dryR
    fhL = np.where(wetL, hL * uL, 0.0)
    fuL = np.where(wetL, hL * uL * uL + 0.5 * g * hL * hL, 0.0)
    fhR = np.where(wetR, hR * uR, 0.0)
    fuR = np.where(wetR, hR * uR * uR + 0.5 * g * hR * hR, 0.0)
    span = sR - sL
    safe = np.where(span > 0, span, 1.0)
    mid_h = (sR * fhL - sL * fhR + sL * sR * (hR - hL)) / safe
    mid_u = (sR * fuL - sL * fuR + sL * sR * (np.where(wetR, huR, 0.0) - np.where(wetL, huL, 0.0))) / safe
    both_dry = dryL & dryR
    Fh = np.where(sL >= 0, fhL, np.where(sR <= 0, fhR, mid_h))
    Fu = np.where(sL >= 0, fuL, np.where(sR <= 0, fuR, mid_u))
    return np.where(both_dry, 0.0, Fh), np.where(both_dry, 0.0, Fu)


def riemann_hll(qL, qR, g: float = G_DEFAULT) -> np.ndarray:
    """Interface flux for the 1D states ``qL = [h, hu]`` and ``qR``."""
    if qL[0] <= H_DRY and qR[0] <= H_DRY:
        raise ValueError("both Riemann states are dry")
    Fh, Fu = hll_flux(qL[0], qL[1], qR[0], qR[1], g)
    return np.array([float(Fh), float(Fu)])


def rotated_hll_flux(qL, qR, theta: float, g: float = G_DEFAULT) -> np.ndarray:
    """Flux of the 2D system across an edge with outward normal angle ``theta``.

    Both states are rotated into the edge frame, the normal problem is solved
    by HLL, the tangential momentum is carried by the mass flux from the
    upwind side, and the result is rotated back.
    """
    rl = rotate_state(qL, theta)
    rr = rotate_state(qR, theta)
    Fh, Fn = riemann_hll(rl[:2], rr[:2], g)
    up = rl if Fh >= 0 else rr
    vt = float(_velocity(up[0], up[2]))
    return rotate_state(np.array([Fh, Fn, Fh * vt]), theta, inverse=True)


# --------------------------------------------------------------------------
# exact Riemann solver (reference)


@dataclass(frozen=True)
class ExactRiemannSolution:
    hL: float
    uL: float
    hR: float
    uR: float
    g: float
    h_star: float
    u_star: float

    @property
    def left_is_shock(self) -> bool:
        return self.h_star > self.hL

    @property
    def right_is_shock(self) -> bool:
        return self.h_star > self.hR

    def _shock_speed(self, side: str) -> float:
        hk, uk = (self.hL, self.uL) if side == "L" else (self.hR, self.uR)
        q = math.sqrt(0.5 * (self.h_star + hk) * self.h_star / hk**2)
        ak = math.sqrt(self.g * hk)
        return uk - ak * q if side == "L" else uk + ak * q

    @property
    def right_front_speed(self) -> float:
        """Speed of the rightmost wave (shock speed, or rarefaction head)."""
        if self.right_is_shock:
            return self._shock_speed("R")
        return self.uR + math.sqrt(self.g * self.hR)

    @property
    def left_front_speed(self) -> float:
        if self.left_is_shock:
            return self._shock_speed("L")
        return self.uL - math.sqrt(self.g * self.hL)

    def sample(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """``(h, u)`` at similarity coordinates ``xi = x / t``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        g = self.g
        aL, aR = math.sqrt(g * self.hL), math.sqrt(g * self.hR)
        a_star = math.sqrt(g * self.h_star)
        h = np.empty_like(xi)
        u = np.empty_like(xi)
        left = xi <= self.u_star
        # left wave
        if self.left_is_shock:
            s = self._shock_speed("L")
            outer = left & (xi < s)
            inner = left & ~outer
        else:
            head, tail = self.uL - aL, self.u_star - a_star
            outer = left & (xi < head)
            fan = left & (xi >= head) & (xi < tail)
            inner = left & (xi >= tail)
            af = (2 * aL + self.uL - xi[fan]) / 3.0
            h[fan] = af * af / g
            u[fan] = (self.uL + 2 * aL + 2 * xi[fan]) / 3.0
        h[outer], u[outer] = self.hL, self.uL
        h[inner], u[inner] = self.h_star, self.u_star
        right = ~left
        if self.right_is_shock:
            s = self._shock_speed("R")
            outer = right & (xi > s)
            inner = right & ~outer
        else:
            head, tail = self.uR + aR, self.u_star + a_star
            outer = right & (xi > head)
            fan = right & (xi <= head) & (xi > tail)
            inner = right & (xi <= tail)
            af = (2 * aR - self.uR + xi[fan]) / 3.0
            h[fan] = af * af / g
            u[fan] = (self.uR - 2 * aR + 2 * xi[fan]) / 3.0
        h[outer], u[outer] = self.hR, self.uR
        h[inner], u[inner] = self.h_star, self.u_star
        return h, u


def _wave_function(h, hk, g):
    if h <= hk:
        return 2.0 * (math.sqrt(g * h) - math.sqrt(g * hk))
    return (h - hk) * math.sqrt(0.5 * g * (h + hk) / (h * hk))


def exact_riemann(hL: float, uL: float, hR: float, uR: float, g: float = G_DEFAULT) -> ExactRiemannSolution:
    """Exact solution of the wet-bed Riemann problem (shock or rarefaction on each side)."""
    if not (hL > 0 and hR > 0):
        raise ValueError("exact solver needs wet states on both sides")
    aL, aR = math.sqrt(g * hL), math.sqrt(g * hR)
    if uR - uL >= 2.0 * (aL + aR):
        raise ValueError("initial data create a dry region (depth positivity condition violated)")
    f = lambda h: _wave_function(h, hL, g) + _wave_function(h, hR, g) + uR - uL
    hi = max(hL, hR)
    while f(hi) < 0:
        hi *= 2.0
    h_star = brentq(f, 1e-14, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    u_star = 0.5 * (uL + uR) + 0.5 * (_wave_function(h_star, hR, g) - _wave_function(h_star, hL, g))
    return ExactRiemannSolution(hL, uL, hR, uR, g, h_star, u_star)


# --------------------------------------------------------------------------
# channels


@dataclass
class ChannelState:
    """A unit-width channel: cell depths and discharges on a uniform grid.

    ``bc_left`` / ``bc_right`` are ``"wall"``, ``"transmissive"`` or
    ``"junction"`` (the face flux is then supplied by the network).
    """

    h: np.ndarray
    hu: np.ndarray
    length: float
    g: float = G_DEFAULT
    bc_left: str = "wall"
    bc_right: str = "wall"
    angle: float = 0.0
    slope: float = 0.0
    name: str = "channel"

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float).copy()
        self.hu = np.asarray(self.hu, dtype=float).copy()
        if self.h.shape != self.hu.shape or self.h.ndim != 1 or self.h.size < 2:
            raise ValueError("h and hu must be 1D arrays of equal length >= 2")
        if not self.length > 0:
            raise ValueError(f"channel length must be positive, got {self.length}")
        for bc in (self.bc_left, self.bc_right):
            if bc not in ("wall", "transmissive", "junction"):
                raise ValueError(f"unknown channel boundary {bc!r}")
        _check_depth(self.h)

    @property
    def n_cells(self) -> int:
        return self.h.size

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return self.dx * (np.arange(self.n_cells) + 0.5)

    @property
    def u(self) -> np.ndarray:
        return _velocity(self.h, self.hu)

    @property
    def mass(self) -> float:
        return float(np.sum(self.h) * self.dx)

    def copy(self) -> "ChannelState":
        return ChannelState(
            self.h, self.hu, self.length, self.g, self.bc_left, self.bc_right, self.angle, self.slope, self.name
        )


def wave_speed_bound(h, hu, g: float = G_DEFAULT) -> float:
    h = np.asarray(h, dtype=float)
    return float(np.max(np.abs(_velocity(h, hu)) + np.sqrt(g * np.maximum(h, 0.0))))


def channel_dt_limit(ch: ChannelState, cfl: float = CFL_DEFAULT) -> float:
    smax = wave_speed_bound(ch.h, ch.hu, ch.g)
    return math.inf if smax == 0 else cfl * ch.dx / smax


def _ghost(ch: ChannelState, side: str):
    i = 0 if side == "left" else -1
    bc = ch.bc_left if side == "left" else ch.bc_right
    if bc == "wall":
        return ch.h[i], -ch.hu[i]
    return ch.h[i], ch.hu[i]


def step_channel(
    ch: ChannelState,
    dt: float,
    left_flux=None,
    right_flux=None,
    cfl: float = CFL_DEFAULT,
) -> ChannelState:
    """First-order Godunov update with HLL face fluxes.

    End fluxes come from the boundary conditions unless ``left_flux`` /
    ``right_flux`` (``[F_h, F_hu]`` in the channel frame) are given.
    """
    bound = channel_dt_limit(ch, cfl)
    if dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt:.4g} violates the CFL bound {bound:.4g} (CFL number {cfl})")
    gl = _ghost(ch, "left")
    gr = _ghost(ch, "right")
    hL = np.concatenate([[gl[0]], ch.h])
    huL = np.concatenate([[gl[1]], ch.hu])
    hR = np.concatenate([ch.h, [gr[0]]])
    huR = np.concatenate([ch.hu, [gr[1]]])
    Fh, Fu = hll_flux(hL, huL, hR, huR, ch.g)
    if left_flux is not None:
        Fh[0], Fu[0] = left_flux
    elif ch.bc_left == "junction":
        raise ValueError(f"{ch.name}: left end is attached to a junction but no flux was supplied")
    if right_flux is not None:
        Fh[-1], Fu[-1] = right_flux
    elif ch.bc_right == "junction":
        raise ValueError(f"{ch.name}: right end is attached to a junction but no flux was supplied")
    r = dt / ch.dx
    new = ch.copy()
    new.h = ch.h - r * (Fh[1:] - Fh[:-1])
    new.hu = ch.hu - r * (Fu[1:] - Fu[:-1])
    if ch.slope:
        new.hu += dt * ch.g * ch.h * ch.slope
    new.h = np.where(np.abs(new.h) < NEGATIVE_DEPTH_TOL, 0.0, new.h)
    _check_depth(new.h)
    new.hu = np.where(new.h <= H_DRY, 0.0, new.hu)
    return new


def channel_velocity_from_2d(u2d: float, v2d: float, u1d_prev: float) -> float:
    """Speed of the 2D velocity carried back into a channel.

    The magnitude is ``sqrt(u2d^2 + v2d^2)``; the sign is that of the previous
    channel velocity, or of ``u2d`` (the component along the channel) when the
    previous velocity is zero.
    """
    mag = math.hypot(u2d, v2d)
    ref = u1d_prev if u1d_prev != 0 else u2d
    return math.copysign(mag, ref) if ref != 0 else mag
