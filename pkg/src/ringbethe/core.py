"""Problem parameters, scattering lengths and the rapidity record.

Convention: hbar = m = 1, so the Hamiltonian reads

    H = -1/2 d^2/dx1^2 - 1/2 d^2/dx2^2 + g delta(x1 - x2)
        + g_B delta(x1) + g_B delta(x2)

on a ring of circumference L. Couplings enter as ``xi = g L`` and
``xi_b = g_B L``; energies come out in units of hbar^2 / (m L^2) when L = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

REDUCED_MASS = 0.5


@dataclass(frozen=True)
class SystemParams:
    """One problem instance.

    Attributes
    ----------
    xi : float
        Particle-particle coupling g in units of hbar^2/(m L).
    xi_b : float
        Particle-barrier coupling g_B in units of hbar^2/(m L).
    ring_length : float
        Circumference L.
    """

    xi: float
    xi_b: float
    ring_length: float = 1.0

    def __post_init__(self):
        if not self.ring_length > 0:
            raise ValueError("ring_length must be positive")
        if not (math.isfinite(self.xi) and math.isfinite(self.xi_b)):
            raise ValueError("couplings must be finite")

    @property
    def g(self) -> float:
        return self.xi / self.ring_length

    @property
    def g_b(self) -> float:
        return self.xi_b / self.ring_length

    @property
    def repulsive(self) -> bool:
        return self.xi > 0 and self.xi_b > 0

    def require_repulsive(self, allow_attractive: bool = False) -> None:
        """Raise unless both couplings are positive or continuation is allowed."""
        if allow_attractive:
            return
        if not self.repulsive:
            raise ValueError(
                "attractive or zero couplings require allow_attractive=True "
                f"(got xi={self.xi}, xi_b={self.xi_b})"
            )


@dataclass(frozen=True)
class ScatteringLengths:
    a: float
    a_b: float
    mu: float = REDUCED_MASS


@dataclass(frozen=True)
class RapidityPair:
    """A real solution ``0 < k1 < k2`` of the Bethe equations."""

    k1: float
    k2: float
    residual_1: float
    residual_2: float
    energy: float

    @classmethod
    def from_rapidities(cls, k1, k2, residual_1=0.0, residual_2=0.0):
        k1, k2 = float(k1), float(k2)
        return cls(k1, k2, float(residual_1), float(residual_2), energy_of(k1, k2))


def scattering_lengths(params: SystemParams) -> ScatteringLengths:
    """Return ``a = -1/(mu g)`` and ``a_b = -1/g_B`` (hbar = m = 1).

    In these variables the contact conditions are
    ``[d psi/d(x1 - x2)] = -(2/a) psi`` on the diagonal and
    ``[d psi/dx_j] = -(2/a_b) psi`` on the barrier lines.
    """
    if params.xi == 0 or params.xi_b == 0:
        raise ValueError("scattering length undefined at zero coupling")
    a = -1.0 / (REDUCED_MASS * params.g)
    a_b = -1.0 / params.g_b
    return ScatteringLengths(a=a, a_b=a_b)


def energy_of(k1: float, k2: float) -> float:
    """Kinetic energy (k1^2 + k2^2) / 2 of a rapidity pair."""
    return 0.5 * (k1 * k1 + k2 * k2)
