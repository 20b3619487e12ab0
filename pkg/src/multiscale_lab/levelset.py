"""Level sets for bubbles embedded in a Cartesian grid.

Convention: ``phi > 0`` inside a bubble and ``phi < 0`` in the fluid, so the
gradient of ``phi`` points from the fluid into the bubble.  A union of bubbles
is the pointwise maximum of the per-shape functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import Grid2D

__all__ = [
    "Circle",
    "SquareHole",
    "shape_from_dict",
    "LevelSetField",
    "GhostClassification",
    "build_level_set",
    "classify_ghosts",
    "FLUID",
    "GHOST",
    "INACTIVE",
]

FLUID, GHOST, INACTIVE = 0, 1, 2
CLEARANCE_CELLS = 3
PROJECTION_MAX_ITER = 50
SNAP_TOL = 1e-12


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    def phi(self, x, y):
        return self.radius - np.hypot(np.asarray(x) - self.center[0], np.asarray(y) - self.center[1])

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r, cy - r, cy + r)

    @property
    def perimeter(self) -> float:
        return 2.0 * math.pi * self.radius

    def point(self, tau):
        """Boundary point at arclength ``tau``, counter-clockwise from angle 0."""
        ang = np.asarray(tau, dtype=float) / self.radius
        return self.center[0] + self.radius * np.cos(ang), self.center[1] + self.radius * np.sin(ang)

    def arclength_of(self, x, y):
        ang = np.arctan2(np.asarray(y) - self.center[1], np.asarray(x) - self.center[0])
        return self.radius * np.mod(ang, 2.0 * math.pi)

    def surface_spacing(self, h: float) -> int:
        """Node count close to one per grid spacing, a multiple of 4 so quarter turns map nodes to nodes."""
        return max(8, 4 * int(round(self.perimeter / (4.0 * h))))


@dataclass(frozen=True)
class SquareHole:
    """Axis-aligned square bubble; ``phi = a - max(|x - cx|, |y - cy|)``."""

    center: tuple[float, float]
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"square half-width must be positive, got {self.half_width}")

    def phi(self, x, y):
        return self.half_width - np.maximum(
            np.abs(np.asarray(x) - self.center[0]), np.abs(np.asarray(y) - self.center[1])
        )

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        a = self.half_width
        return (cx - a, cx + a, cy - a, cy + a)

    @property
    def perimeter(self) -> float:
        return 8.0 * self.half_width

    def point(self, tau):
        """Counter-clockwise from the lower-left corner."""
        a = self.half_width
        cx, cy = self.center
        t = np.mod(np.asarray(tau, dtype=float), self.perimeter)
        edge = np.minimum((t // (2 * a)).astype(int), 3)
        s = t - 2 * a * edge
        x = np.select([edge == 0, edge == 1, edge == 2], [-a + s, a + 0 * s, a - s], -a + 0 * s)
        y = np.select([edge == 0, edge == 1, edge == 2], [-a + 0 * s, -a + s, a + 0 * s], a - s)
        return cx + x, cy + y

    def arclength_of(self, x, y):
        a = self.half_width
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        bottom = (dy <= -np.abs(dx))
        top = (dy >= np.abs(dx))
        right = (dx > 0) & ~bottom & ~top
        tau = np.select([bottom, right, top], [dx + a, 2 * a + dy + a, 4 * a + a - dx], 6 * a + a - dy)
        return np.mod(tau, self.perimeter)

    def surface_spacing(self, h: float) -> int:
        return 4 * max(2, int(round(2 * self.half_width / h)))


def shape_from_dict(d: dict):
    """Shape from a config mapping: ``{kind: circle, center, radius}`` or ``{kind: square, center, half_width}``."""
    kind = d.get("kind")
    center = tuple(float(v) for v in d.get("center", (0.0, 0.0)))
    if len(center) != 2:
        raise ValueError("shape center must have two coordinates")
    if kind == "circle":
        return Circle(center, float(d["radius"]))
    if kind == "square":
        return SquareHole(center, float(d["half_width"]))
    raise ValueError(f"unknown shape kind {kind!r}; expected 'circle' or 'square'")


@dataclass(frozen=True)
class LevelSetField:
    grid: Grid2D
    shapes: tuple
    values: np.ndarray = field(repr=False)

    def phi(self, x, y):
        """Analytic level set at arbitrary points (union = pointwise max)."""
        x = np.asarray(x, dtype=float)
        if not self.shapes:
            return np.full(np.broadcast(x, np.asarray(y)).shape, -np.inf)
        return np.maximum.reduce([s.phi(x, y) for s in self.shapes])

    @property
    def fluid(self) -> np.ndarray:
        return self.values < 0

    def owner(self, x: float, y: float) -> int:
        """Index of the shape whose boundary passes closest to ``(x, y)``."""
        return int(np.argmax([s.phi(x, y) for s in self.shapes]))


def build_level_set(shapes: Sequence, grid: Grid2D) -> LevelSetField:
    """Sample the union of ``shapes`` on the grid nodes.

    Every shape must keep ``3 h`` away from the outer boundary, and shapes must
    not touch each other.
    """
    shapes = tuple(shape_from_dict(s) if isinstance(s, dict) else s for s in shapes)
    clear_x = CLEARANCE_CELLS * grid.hx
    clear_y = CLEARANCE_CELLS * grid.hy
    for s in shapes:
        x0, x1, y0, y1 = s.bounds
        if (
            x0 < grid.x.x_min + clear_x
            or x1 > grid.x.x_max - clear_x
            or y0 < grid.y.x_min + clear_y
            or y1 > grid.y.x_max - clear_y
        ):
            raise ValueError(f"{s} lies within {CLEARANCE_CELLS} cells of the outer boundary")
    for i, a in enumerate(shapes):
        tau = np.linspace(0.0, a.perimeter, 400, endpoint=False)
        px, py = a.point(tau)
        for j, b in enumerate(shapes):
            if i != j and np.any(b.phi(px, py) >= 0):
                raise ValueError(f"shapes {i} and {j} overlap or touch")
    X, Y = grid.mesh()
    values = np.maximum.reduce([s.phi(X, Y) for s in shapes]) if shapes else np.full(grid.shape, -np.inf)
    # nodes on the interface up to round-off count as bubble, independent of the rounding direction
    values[np.abs(values) < SNAP_TOL * min(grid.hx, grid.hy)] = 0.0
    return LevelSetField(grid, shapes, values)


@dataclass(frozen=True)
class GhostClassification:
    """Node tags plus, for each ghost, its projection onto the interface and the unit normal there."""

    tags: np.ndarray
    ghost_index: np.ndarray  # (n_ghost, 2) integer node indices
    projections: np.ndarray  # (n_ghost, 2)
    normals: np.ndarray  # (n_ghost, 2), pointing into the bubble

    @property
    def n_ghost(self) -> int:
        return len(self.ghost_index)


def _grad_phi(ls: LevelSetField, x: float, y: float, step: float) -> np.ndarray:
    gx = (ls.phi(x + step, y) - ls.phi(x - step, y)) / (2 * step)
    gy = (ls.phi(x, y + step) - ls.phi(x, y - step)) / (2 * step)
    return np.array([float(gx), float(gy)])


def classify_ghosts(ls: LevelSetField) -> GhostClassification:
    """Tag nodes as fluid, ghost (bubble node next to the fluid) or inactive, and project ghosts.

    Projections iterate ``p <- p - phi(p) grad(phi)/|grad(phi)|^2`` with
    central-difference gradients until ``|phi(p)| < 1e-10 h``.
    """
    fluid = ls.fluid
    nx, ny = fluid.shape
    tags = np.where(fluid, FLUID, INACTIVE)
    near = np.zeros_like(fluid)
    near[1:, :] |= fluid[:-1, :]
    near[:-1, :] |= fluid[1:, :]
    near[:, 1:] |= fluid[:, :-1]
    near[:, :-1] |= fluid[:, 1:]
    ghost = near & ~fluid
    tags[ghost] = GHOST
    idx = np.argwhere(ghost)
    h = min(ls.grid.hx, ls.grid.hy)
    tol = 1e-10 * h
    step = 1e-6 * h
    X, Y = ls.grid.mesh()
    proj = np.empty((len(idx), 2))
    normals = np.empty((len(idx), 2))
    for n, (i, j) in enumerate(idx):
        p = np.array([X[i, j], Y[i, j]])
        for _ in range(PROJECTION_MAX_ITER):
            val = float(ls.phi(p[0], p[1]))
            if abs(val) < tol:
                break
            g = _grad_phi(ls, p[0], p[1], step)
            gg = float(g @ g)
            if gg == 0.0:
                raise RuntimeError(f"degenerate level-set gradient while projecting ghost node ({i}, {j})")
            p = p - val * g / gg
        else:
            raise RuntimeError(f"projection of ghost node ({i}, {j}) did not converge in {PROJECTION_MAX_ITER} steps")
        g = _grad_phi(ls, p[0], p[1], step)
        proj[n] = p
        normals[n] = g / np.linalg.norm(g)
    return GhostClassification(tags, idx, proj, normals)
