"""Physical setup and equations of motion for the symmetric heavy top.

A heavy rigid body with a fixed point, equal transverse moments of inertia
(A = B) and center of gravity on the symmetry axis, described in the body
frame by the angular momentum M = (M1, M2, M3) and the unit gravity
direction gamma = (g1, g2, g3):

    dM/dt     = M x (I^-1 M) + m*g * gamma x r_G
    dgamma/dt = gamma x (I^-1 M)

with inertia tensor I = diag(A, A, C) and r_G = (0, 0, z).  Expanding the
cross products with I^-1 M = (M1/A, M2/A, M3/C) gives the component form
used throughout this package:

    dM1 = M2*M3*(1/C - 1/A) + m*g*z*g2
    dM2 = M1*M3*(1/A - 1/C) - m*g*z*g1
    dM3 = 0
    dg1 = g2*M3/C - g3*M2/A
    dg2 = g3*M1/A - g1*M3/C
    dg3 = (g1*M2 - g2*M1)/A

Note dM3 = 0 identically, so the axial momentum is conserved bit-for-bit
by any integrator built on this right-hand side.

Four quantities are constant along every solution:

    H  = (M1^2/A + M2^2/A + M3^2/C)/2 + m*g*z*g3   (energy)
    C1 = g1^2 + g2^2 + g3^2                        (gamma norm squared)
    C2 = M1*g1 + M2*g2 + M3*g3
    F  = M3

The vertical uniform rotation ("sleeping top") (0, 0, M3, 0, 0, 1) is an
equilibrium for every spin M3.  Its Lyapunov stability is decided by the
sign of the margin M3^2 - 4*A*m*g*z; the critical spin is
2*sqrt(A*m*g*z).

Units are SI: kg m^2 for moments of inertia, kg m^2/s for angular
momentum, m/s^2 for g, meters for z.  All functions here are pure and the
value types immutable, so everything is safe to share across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TopParams",
    "TopState",
    "ConservedSet",
    "rhs",
    "conserved",
    "equilibrium",
    "m3_from_omega",
    "spin_margin",
    "margin_tolerance",
]


@dataclass(frozen=True)
class TopParams:
    """Physical constants of the symmetric top.

    A: principal moment of inertia about the two equal transverse axes.
    C: principal moment about the symmetry axis.
    m: mass.
    g: gravitational acceleration.
    z: distance from the fixed point to the center of gravity along the
       symmetry axis (must be positive; the center of gravity sits above
       the fixed point when gamma = (0, 0, 1)).
    """

    A: float
    C: float
    m: float
    g: float
    z: float

    def __post_init__(self):
        for name in ("A", "C", "m", "g", "z"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if self.C > 2.0 * self.A:
            # Physically realizable rigid bodies satisfy C <= 2A; none of
            # the stability results below depend on it, so only warn.
            warnings.warn(
                f"C = {self.C} exceeds 2A = {2.0 * self.A}; "
                "no rigid body has such moments of inertia",
                UserWarning,
                stacklevel=2,
            )

    @property
    def mgz(self) -> float:
        return self.m * self.g * self.z

    def critical_spin(self) -> float:
        """Critical axial momentum 2*sqrt(A*m*g*z) separating stable from
        unstable vertical rotation."""
        return 2.0 * math.sqrt(self.A * self.mgz)


@dataclass(frozen=True, eq=False)
class TopState:
    """Body-frame state: angular momentum M and gravity direction gamma.

    gamma must have unit norm at the start of a trajectory; during
    integration the norm is monitored (via C1) rather than enforced.
    """

    M: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if M.shape != (3,) or gamma.shape != (3,):
            raise ValueError("M and gamma must be 3-vectors")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def from_array(cls, y: np.ndarray) -> "TopState":
        y = np.asarray(y, dtype=float)
        if y.shape != (6,):
            raise ValueError("state vector must have 6 components")
        return cls(M=y[:3].copy(), gamma=y[3:].copy())

    def as_array(self) -> np.ndarray:
        """Flat (M1, M2, M3, g1, g2, g3) vector."""
        return np.concatenate([self.M, self.gamma])

    def distance_to(self, other: "TopState") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def __eq__(self, other):
        if not isinstance(other, TopState):
            return NotImplemented
        return np.array_equal(self.M, other.M) and np.array_equal(
            self.gamma, other.gamma
        )


@dataclass(frozen=True)
class ConservedSet:
    """Values of the four conserved quantities at one state."""

    H: float
    C1: float
    C2: float
    F: float

    def as_array(self) -> np.ndarray:
        return np.array([self.H, self.C1, self.C2, self.F])

    def __sub__(self, other: "ConservedSet") -> "ConservedSet":
        return ConservedSet(
            H=self.H - other.H,
            C1=self.C1 - other.C1,
            C2=self.C2 - other.C2,
            F=self.F - other.F,
        )


def _rhs6(A, C, mgz, m1, m2, m3, g1, g2, g3):
    """Right-hand side on plain floats (hot path for the integrator).

    Written so that every term vanishes exactly (as 0.0 floats) at the
    vertical equilibria (0, 0, m3, 0, 0, 1), and so that dM3 is the
    literal constant 0.0.
    """
    return (
        m2 * m3 * (1.0 / C - 1.0 / A) + mgz * g2,
        m1 * m3 * (1.0 / A - 1.0 / C) - mgz * g1,
        0.0,
        g2 * m3 / C - g3 * m2 / A,
        g3 * m1 / A - g1 * m3 / C,
        (g1 * m2 - g2 * m1) / A,
    )


def rhs(params: TopParams, state: TopState) -> np.ndarray:
    """Time derivative (dM, dgamma) of the Euler-Poisson system as a
    flat 6-vector."""
    m1, m2, m3 = state.M
    g1, g2, g3 = state.gamma
    return np.array(_rhs6(params.A, params.C, params.mgz, m1, m2, m3, g1, g2, g3))


def conserved(params: TopParams, state: TopState) -> ConservedSet:
    """Evaluate the four conserved quantities at a state."""
    m1, m2, m3 = state.M
    g1, g2, g3 = state.gamma
    H = 0.5 * (m1 * m1 / params.A + m2 * m2 / params.A + m3 * m3 / params.C)
    H += params.mgz * g3
    return ConservedSet(
        H=H,
        C1=g1 * g1 + g2 * g2 + g3 * g3,
        C2=m1 * g1 + m2 * g2 + m3 * g3,
        F=m3,
    )


def equilibrium(M3: float) -> TopState:
    """The vertical uniform rotation (0, 0, M3, 0, 0, 1)."""
    return TopState(M=np.array([0.0, 0.0, float(M3)]), gamma=np.array([0.0, 0.0, 1.0]))


def m3_from_omega(params: TopParams, omega: float) -> float:
    """Axial angular momentum C*omega for a vertical rotation given by its
    angular velocity.

    Maps the velocity-form stability condition C^2 omega^2 >= 4*A*m*g*z
    onto the momentum form M3^2 >= 4*A*m*g*z.
    """
    return params.C * omega


def spin_margin(params: TopParams, m3: float) -> float:
    """Stability margin M3^2 - 4*A*m*g*z; nonnegative means stable."""
    return m3 * m3 - 4.0 * params.A * params.mgz


def margin_tolerance(params: TopParams, m3: float) -> float:
    """Classification tolerance on the stability margin.

    States within this distance of the threshold are treated as sitting
    exactly on it (and hence classified stable).  Scaled so that a spin
    computed as 2*sqrt(A*m*g*z) in floating point always lands inside the
    tolerance band regardless of parameter magnitudes.
    """
    return 1e-9 * max(1.0, m3 * m3, 4.0 * params.A * params.mgz)
