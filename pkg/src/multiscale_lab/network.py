"""Channel networks joined by single-cell 2D junction elements.

A junction is one finite volume with state ``[h, hu, hv]``, an area and a
closed polygon of edges.  Each edge has an outward normal angle, a length and
either a channel end or a wall behind it.  An edge flux is a rotated 2D
Riemann problem between the junction state and the channel end cell (its
velocity embedded along the channel axis with no transversal part), or the
mirrored junction state at a wall.

The normal of an edge that couples a channel is the channel axis angle for
the channel's left end and that angle plus pi for its right end.  The face
flux handed to the channel is ``[sign * F_h, F_n]`` with ``sign = +1`` at a
left end and ``-1`` at a right end, so the mass leaving the junction enters
the channel exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .shallow_water import (
    CFL_DEFAULT,
    G_DEFAULT,
    ChannelState,
    channel_dt_limit,
    riemann_hll,
    rotate_state,
    step_channel,
    wave_speed_bound,
    _velocity,
)

__all__ = [
    "JunctionEdge",
    "Junction",
    "ChannelNetwork",
    "NetworkConfigError",
    "regular_junction",
    "edge_flux",
    "junction_fluxes",
    "network_dt",
    "step_network",
    "run_network",
    "network_mass",
    "build_network",
]

ANGLE_TOL = 1e-9


class NetworkConfigError(ValueError):
    """Invalid network description; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class JunctionEdge:
    angle: float
    length: float
    channel: str | None = None
    end: str | None = None  # "left" or "right" when a channel is attached

    @property
    def is_wall(self) -> bool:
        return self.channel is None


@dataclass
class Junction:
    name: str
    area: float
    edges: tuple
    q: np.ndarray
    g: float = G_DEFAULT

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).copy()
        if not self.area > 0:
            raise ValueError(f"junction {self.name}: area must be positive")
        if self.q.shape != (3,) or self.q[0] <= 0:
            raise ValueError(f"junction {self.name}: state must be [h, hu, hv] with h > 0")
        total = sum(e.length for e in self.edges)
        closure = np.sum([[e.length * math.cos(e.angle), e.length * math.sin(e.angle)] for e in self.edges], axis=0)
        if np.max(np.abs(closure)) > 1e-12 * max(total, 1.0):
            raise ValueError(f"junction {self.name}: edges do not close (sum of length * normal = {closure})")

    @property
    def mass(self) -> float:
        return float(self.q[0] * self.area)

    def copy(self) -> "Junction":
        return Junction(self.name, self.area, self.edges, self.q, self.g)


def regular_junction(name, links, n_sides: int, q0, g: float = G_DEFAULT, side: float = 1.0, area=None) -> Junction:
    """Regular polygon with sides ``side``; edge ``k`` has normal angle ``2 pi k / n_sides``.

    ``links`` maps side indices to ``(channel, end)``; remaining sides are walls.
    """
    if n_sides < 3:
        raise ValueError("a regular junction needs at least 3 sides")
    edges = []
    for k in range(n_sides):
        ang = math.remainder(2.0 * math.pi * k / n_sides, 2.0 * math.pi)
        ch, end = links.get(k, (None, None))
        edges.append(JunctionEdge(ang, side, ch, end))
    if area is None:
        area = n_sides * side * side / (4.0 * math.tan(math.pi / n_sides))
    return Junction(name, area, tuple(edges), q0, g)


@dataclass
class ChannelNetwork:
    channels: dict
    junctions: list
    cfl: float = CFL_DEFAULT
    t: float = 0.0

    def __post_init__(self):
        errors = []
        seen: dict[tuple[str, str], str] = {}
        for j in self.junctions:
            for k, e in enumerate(j.edges):
                if e.is_wall:
                    continue
                tag = f"{j.name}.edge[{k}]"
                ch = self.channels.get(e.channel)
                if ch is None:
                    errors.append(f"{tag}: unknown channel {e.channel!r}")
                    continue
                if e.end not in ("left", "right"):
                    errors.append(f"{tag}: end must be 'left' or 'right', got {e.end!r}")
                    continue
                key = (e.channel, e.end)
                if key in seen:
                    errors.append(f"channel {e.channel} {e.end} end is linked twice: {seen[key]} and {tag}")
                    continue
                seen[key] = tag
                expected = ch.angle if e.end == "left" else ch.angle + math.pi
                if abs(math.remainder(e.angle - expected, 2.0 * math.pi)) > ANGLE_TOL:
                    errors.append(
                        f"{tag}: normal angle {e.angle:.6g} does not match channel {e.channel} "
                        f"({e.end} end needs {math.remainder(expected, 2 * math.pi):.6g})"
                    )
        for name, ch in self.channels.items():
            for end, bc in (("left", ch.bc_left), ("right", ch.bc_right)):
                linked = (name, end) in seen
                if bc == "junction" and not linked:
                    errors.append(f"channel {name} {end} end is marked 'junction' but no junction edge links it")
                if bc != "junction" and linked:
                    errors.append(f"channel {name} {end} end has boundary {bc!r} but is linked by {seen[(name, end)]}")
        if errors:
            raise NetworkConfigError(errors)

    def copy(self) -> "ChannelNetwork":
        return ChannelNetwork(
            {k: c.copy() for k, c in self.channels.items()}, [j.copy() for j in self.junctions], self.cfl, self.t
        )


def _embedded(ch: ChannelState, end: str) -> np.ndarray:
    i = 0 if end == "left" else -1
    h, hu = ch.h[i], ch.hu[i]
    return np.array([h, hu * math.cos(ch.angle), hu * math.sin(ch.angle)])


def edge_flux(q_inside, q_outside, theta: float, g: float) -> np.ndarray:
    """Rotated-frame flux ``[F_h, F_n, F_t]`` leaving the junction through an edge with normal ``theta``."""
    rl = rotate_state(q_inside, theta)
    rr = rotate_state(q_outside, theta)
    Fh, Fn = riemann_hll(rl[:2], rr[:2], g)
    up = rl if Fh >= 0 else rr
    return np.array([Fh, Fn, Fh * float(_velocity(up[0], up[2]))])


def junction_fluxes(j: Junction, channels: dict):
    """Rate of change of the junction state and the face flux for every attached channel end."""
    total = np.zeros(3)
    faces = {}
    for e in j.edges:
        if e.is_wall:
            inner = rotate_state(j.q, e.angle)
            mirror = rotate_state(np.array([inner[0], -inner[1], inner[2]]), e.angle, inverse=True)
            f_rot = edge_flux(j.q, mirror, e.angle, j.g)
        else:
            ch = channels[e.channel]
            f_rot = edge_flux(j.q, _embedded(ch, e.end), e.angle, j.g)
            sign = 1.0 if e.end == "left" else -1.0
            faces[(e.channel, e.end)] = (sign * f_rot[0], f_rot[1])
        total += e.length * rotate_state(f_rot, e.angle, inverse=True)
    return -total / j.area, faces


def network_dt(net: ChannelNetwork) -> float:
    dt = math.inf
    for ch in net.channels.values():
        dt = min(dt, channel_dt_limit(ch, net.cfl))
    for j in net.junctions:
        speeds = [wave_speed_bound(j.q[0], math.hypot(j.q[1], j.q[2]), j.g)]
        for e in j.edges:
            if not e.is_wall:
                ch = net.channels[e.channel]
                i = 0 if e.end == "left" else -1
                speeds.append(wave_speed_bound(ch.h[i], ch.hu[i], ch.g))
        perimeter = sum(e.length for e in j.edges)
        smax = max(speeds)
        if smax > 0:
            dt = min(dt, net.cfl * j.area / (perimeter * smax))
    return dt


def step_network(net: ChannelNetwork, dt: float | None = None) -> ChannelNetwork:
    """Two-phase step: all junction edge fluxes from the current states, then every update."""
    bound = network_dt(net)
    if dt is None:
        dt = bound
    elif dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt:.4g} violates the network CFL bound {bound:.4g}")
    rates = []
    faces = {}
    for j in net.junctions:
        rate, f = junction_fluxes(j, net.channels)
        rates.append(rate)
        faces.update(f)
    channels = {}
    for name, ch in net.channels.items():
        channels[name] = step_channel(
            ch, dt, faces.get((name, "left")), faces.get((name, "right")), cfl=net.cfl
        )
    junctions = []
    for j, rate in zip(net.junctions, rates):
        new = j.copy()
        new.q = j.q + dt * rate
        if new.q[0] <= 0:
            raise ValueError(f"junction {j.name} ran dry (h = {new.q[0]:.3e})")
        junctions.append(new)
    return ChannelNetwork(channels, junctions, net.cfl, net.t + dt)


def run_network(net: ChannelNetwork, t_end: float, callback=None, max_steps: int = 10_000_000) -> ChannelNetwork:
    steps = 0
    while net.t < t_end - 1e-14 * max(1.0, t_end):
        dt = min(network_dt(net), t_end - net.t)
        net = step_network(net, dt)
        steps += 1
        if callback is not None:
            callback(net)
        if steps >= max_steps:
            raise RuntimeError(f"network run exceeded {max_steps} steps")
    return net


def network_mass(net: ChannelNetwork) -> float:
    """Total water volume in channels (unit width) and junctions."""
    return sum(ch.mass for ch in net.channels.values()) + sum(j.mass for j in net.junctions)


# --------------------------------------------------------------------------
# construction from a config mapping


def _initial_profile(spec, x, length, errors, path):
    """Depth and velocity from ``{h, u}`` or a dam ``{h_left, h_right, x_split, u}``."""
    if spec is None:
        errors.append(f"{path}: missing initial state")
        return None
    u = float(spec.get("u", 0.0))
    if "h" in spec:
        h = np.full(x.size, float(spec["h"]))
    elif {"h_left", "h_right"} <= set(spec):
        split = float(spec.get("x_split", 0.5 * length))
        h = np.where(x < split, float(spec["h_left"]), float(spec["h_right"]))
    else:
        errors.append(f"{path}: give 'h' or 'h_left'/'h_right'")
        return None
    if np.any(h < 0):
        errors.append(f"{path}: depth must be >= 0")
        return None
    return h, h * u


def build_network(cfg: dict, g: float = G_DEFAULT, cfl: float = CFL_DEFAULT, path: str = "network") -> ChannelNetwork:
    """Network from a config mapping; every problem is collected before raising."""
    errors = []
    channels = {}
    for k, c in enumerate(cfg.get("channels") or []):
        p = f"{path}.channels[{k}]"
        try:
            name = str(c["id"])
            length = float(c["length"])
            cells = int(c["cells"])
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"{p}: channels need id, length and cells ({exc})")
            continue
        if name in channels:
            errors.append(f"{p}: duplicate channel id {name!r}")
            continue
        if length <= 0:
            errors.append(f"{p}.length: must be positive")
            continue
        if cells < 2:
            errors.append(f"{p}.cells: need at least 2 cells")
            continue
        x = (np.arange(cells) + 0.5) * length / cells
        prof = _initial_profile(c.get("initial"), x, length, errors, f"{p}.initial")
        if prof is None:
            continue
        try:
            channels[name] = ChannelState(
                prof[0],
                prof[1],
                length,
                g,
                c.get("bc_left", "wall"),
                c.get("bc_right", "wall"),
                float(c.get("angle", 0.0)),
                float(c.get("slope", 0.0)),
                name,
            )
        except ValueError as exc:
            errors.append(f"{p}: {exc}")
    junctions = []
    for k, jc in enumerate(cfg.get("junctions") or []):
        p = f"{path}.junctions[{k}]"
        name = str(jc.get("id", f"J{k}"))
        init = jc.get("initial") or {}
        q0 = [float(init.get("h", 0.0)), float(init.get("h", 0.0)) * float(init.get("u", 0.0)),
              float(init.get("h", 0.0)) * float(init.get("v", 0.0))]
        edges = []
        for m, e in enumerate(jc.get("edges") or []):
            ep = f"{p}.edges[{m}]"
            link = e.get("channel")
            end = e.get("end")
            if "angle" in e:
                angle = float(e["angle"])
            elif link is not None and link in channels and end in ("left", "right"):
                angle = channels[link].angle + (0.0 if end == "left" else math.pi)
            else:
                errors.append(f"{ep}: wall edges need an explicit angle")
                continue
            length = float(e.get("length", 1.0))
            if length <= 0:
                errors.append(f"{ep}.length: must be positive")
                continue
            edges.append(JunctionEdge(math.remainder(angle, 2 * math.pi), length, link, end))
        try:
            if "sides" in jc:
                links = {}
                for e in edges:
                    if not e.is_wall:
                        sides = int(jc["sides"])
                        idx = int(round(e.angle / (2 * math.pi / sides))) % sides
                        links[idx] = (e.channel, e.end)
                junctions.append(regular_junction(name, links, int(jc["sides"]), q0, g, area=jc.get("area")))
            else:
                if "area" not in jc:
                    errors.append(f"{p}.area: required when 'sides' is not given")
                    continue
                junctions.append(Junction(name, float(jc["area"]), tuple(edges), q0, g))
        except ValueError as exc:
            errors.append(f"{p}: {exc}")
    if errors:
        raise NetworkConfigError(errors)
    return ChannelNetwork(channels, junctions, cfl)
