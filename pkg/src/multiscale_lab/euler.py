"""Characteristic speeds of the 1D Euler equations in primitive variables ``(rho, u, p)``."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

__all__ = ["EulerPrimitiveState", "EulerEigen", "euler_matrix", "euler_eigenvalues", "characteristic_polynomial"]


@dataclass(frozen=True)
class EulerPrimitiveState:
    """Density, velocity, pressure and the squared sound speed ``a2 = (dp/drho)_S``.

    ``a2`` may be negative for a non-physical equation of state; the system
    then loses hyperbolicity.
    """

    rho: float
    u: float
    p: float
    a2: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"density must be positive, got {self.rho}")

    @property
    def a(self) -> complex | float:
        return np.sqrt(self.a2) if self.a2 >= 0 else cmath.sqrt(self.a2)


@dataclass(frozen=True)
class EulerEigen:
    values: tuple  # (u - a, u, u + a), complex when a2 < 0
    hyperbolic: bool
    degenerate: bool  # a2 == 0: triple eigenvalue, eigenvectors incomplete

    def describe(self) -> str:
        if not self.hyperbolic:
            return "not hyperbolic (complex sound speed)"
        return "hyperbolic, degenerate (a = 0)" if self.degenerate else "hyperbolic"


def euler_matrix(s: EulerPrimitiveState) -> np.ndarray:
    """Coefficient matrix of ``V_t + M(V) V_x = 0``."""
    return np.array([[s.u, s.rho, 0.0], [0.0, s.u, 1.0 / s.rho], [0.0, s.a2 * s.rho, s.u]])


def characteristic_polynomial(s: EulerPrimitiveState, lam) -> complex:
    """``det(lam I - M)`` evaluated directly from the matrix."""
    return complex(np.linalg.det(lam * np.eye(3) - euler_matrix(s).astype(complex)))


def euler_eigenvalues(s: EulerPrimitiveState) -> EulerEigen:
    a = s.a
    values = (s.u - a, s.u + 0.0 * a, s.u + a)
    if s.a2 >= 0:
        values = tuple(float(np.real(v)) for v in values)
    return EulerEigen(values, hyperbolic=s.a2 >= 0, degenerate=s.a2 == 0)
