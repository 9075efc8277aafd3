"""Isolation of the vertical rotation inside its conserved-quantity level set.

Whether a Lyapunov function can be assembled from the conserved
quantities {H, C1, C2, F} reduces to an algebraic question: is the
equilibrium (0, 0, M3, 0, 0, 1) an isolated root of the system

    H(x)  = M3^2/(2C) + m*g*z
    C1(x) = 1
    C2(x) = M3
    F(x)  = M3 ?

Substituting F and switching to transverse polar coordinates
M1 = u cos(phi), M2 = u sin(phi), g1 = v cos(theta), g2 = v sin(theta)
turns the system into

    u^2 = 2*A*m*g*z*(1 - g3)
    v^2 = 1 - g3^2
    u*v*cos(theta - phi) = M3*(1 - g3).

Dividing the third equation by (1 - g3) for g3 < 1 shows any nontrivial
nearby root needs |M3| = sqrt(2*A*m*g*z*(1 + g3)) * |cos(theta - phi)|
< 2*sqrt(A*m*g*z), so the equilibrium is isolated if and only if
M3^2 >= 4*A*m*g*z -- the same threshold the spectrum produces.  Below
the threshold the root set is a continuum: for every g3 close enough to
1 there is an exact solution, constructed here in closed form
(WitnessFamily).  grid_search_oracle verifies both directions by brute
force, without using the closed-form constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TopParams,
    TopState,
    conserved,
    equilibrium,
    margin_tolerance,
    spin_margin,
)

__all__ = [
    "ReducedPoint",
    "WitnessFamily",
    "IsolationVerdict",
    "GridSearchResult",
    "level_residuals",
    "reduced_residuals",
    "certify_isolation",
    "grid_search_oracle",
]

# Margin added to the arccos-domain bound on gamma3 so witnesses never
# evaluate arccos at the exact endpoint.
_GAMMA3_DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class ReducedPoint:
    """Transverse polar coordinates of a state: M1 = u cos(phi),
    M2 = u sin(phi), g1 = v cos(theta), g2 = v sin(theta)."""

    u: float
    phi: float
    v: float
    theta: float
    gamma3: float

    def __post_init__(self):
        if self.u < 0.0 or self.v < 0.0:
            raise ValueError("u and v must be nonnegative magnitudes")
        if not -1.0 <= self.gamma3 <= 1.0:
            raise ValueError(f"gamma3 must lie in [-1, 1], got {self.gamma3!r}")

    @classmethod
    def from_state(cls, state: TopState) -> "ReducedPoint":
        m1, m2, _ = state.M
        g1, g2, g3 = state.gamma
        return cls(
            u=math.hypot(m1, m2),
            phi=math.atan2(m2, m1),
            v=math.hypot(g1, g2),
            theta=math.atan2(g2, g1),
            gamma3=g3,
        )

    def to_state(self, M3: float) -> TopState:
        return TopState(
            M=np.array([self.u * math.cos(self.phi), self.u * math.sin(self.phi), M3]),
            gamma=np.array(
                [
                    self.v * math.cos(self.theta),
                    self.v * math.sin(self.theta),
                    self.gamma3,
                ]
            ),
        )


def level_residuals(params: TopParams, M3_eq: float, state: TopState) -> np.ndarray:
    """Left-minus-right residuals (energy, gamma norm, C2, M3) of the
    level-set system at ``state``; componentwise this is
    conserved(state) - conserved(equilibrium(M3_eq))."""
    vals = conserved(params, state)
    ref = conserved(params, equilibrium(M3_eq))
    return (vals - ref).as_array()


def reduced_residuals(params: TopParams, M3_eq: float, p: ReducedPoint) -> np.ndarray:
    """Residuals of the three reduced equations at a ReducedPoint."""
    w = 1.0 - p.gamma3
    return np.array(
        [
            p.u * p.u - 2.0 * params.A * params.mgz * w,
            p.v * p.v - (1.0 - p.gamma3 * p.gamma3),
            p.u * p.v * math.cos(p.theta - p.phi) - M3_eq * w,
        ]
    )


@dataclass(frozen=True)
class WitnessFamily:
    """Closed-form nontrivial level-set solutions near the equilibrium.

    Exists only below the threshold (M3^2 < 4*A*m*g*z).  For gamma3 in
    the half-open interval [gamma3_min, 1) the point

        u = sqrt(2*A*m*g*z*(1 - gamma3)),  phi = 0,
        v = sqrt(1 - gamma3^2),            theta = delta,
        delta = arccos(M3 / sqrt(2*A*m*g*z*(1 + gamma3)))

    satisfies all level-set equations exactly (up to rounding) and
    converges to the equilibrium as gamma3 -> 1.  The overall rotation
    phase is a gauge freedom; phi = 0 fixes it deterministically.
    """

    params: TopParams
    M3_eq: float

    @property
    def gamma3_min(self) -> float:
        """Lower end of the gamma3 domain (inclusive).

        The arccos argument must not exceed 1 in magnitude, which needs
        gamma3 >= M3^2/(2*A*m*g*z) - 1; a 1e-9 margin keeps strictly
        inside the arccos domain whenever that bound is the active one.
        Otherwise gamma3 = 0 itself is a valid witness location (it sits
        outside the unit ball around the equilibrium, but solves the
        level-set system exactly all the same).
        """
        bound = self.M3_eq**2 / (2.0 * self.params.A * self.params.mgz) - 1.0
        return max(0.0, bound + _GAMMA3_DOMAIN_MARGIN)

    def _delta(self, gamma3: float) -> float:
        arg = self.M3_eq / math.sqrt(
            2.0 * self.params.A * self.params.mgz * (1.0 + gamma3)
        )
        return math.acos(min(1.0, max(-1.0, arg)))

    def reduced(self, gamma3: float) -> ReducedPoint:
        if not self.gamma3_min <= gamma3 < 1.0:
            raise ValueError(
                f"gamma3 must lie in [{self.gamma3_min!r}, 1), got {gamma3!r}"
            )
        w = 1.0 - gamma3
        return ReducedPoint(
            u=math.sqrt(2.0 * self.params.A * self.params.mgz * w),
            phi=0.0,
            v=math.sqrt(w * (1.0 + gamma3)),
            theta=self._delta(gamma3),
            gamma3=gamma3,
        )

    def __call__(self, gamma3: float) -> TopState:
        return self.reduced(gamma3).to_state(self.M3_eq)

    def distance_at(self, gamma3: float) -> float:
        """Distance of the witness at ``gamma3`` from the equilibrium.

        u^2 + v^2 + (1 - gamma3)^2 collapses to
        2*(A*m*g*z + 1)*(1 - gamma3), so the distance is monotone in
        gamma3 and independent of the phases.
        """
        return math.sqrt(2.0 * (self.params.A * self.params.mgz + 1.0) * (1.0 - gamma3))

    def gamma3_at_distance(self, distance: float) -> float:
        """Invert distance_at: the gamma3 whose witness sits exactly
        ``distance`` away from the equilibrium."""
        gamma3 = 1.0 - distance**2 / (2.0 * (self.params.A * self.params.mgz + 1.0))
        if not self.gamma3_min <= gamma3 < 1.0:
            raise ValueError(
                f"no witness at distance {distance!r}: gamma3 would be {gamma3!r}"
            )
        return gamma3


@dataclass(frozen=True)
class IsolationVerdict:
    """Isolation certificate for one vertical rotation.

    When not isolated, ``witness_family`` generates exact nontrivial
    level-set solutions arbitrarily close to the equilibrium.
    """

    isolated: bool
    margin: float
    threshold: float
    witness_family: WitnessFamily | None

    @property
    def verdict(self) -> str:
        return "Isolated" if self.isolated else "NotIsolated"


def certify_isolation(params: TopParams, M3_eq: float) -> IsolationVerdict:
    """Decide isolation of equilibrium(M3_eq) in its level set.

    Isolated exactly when M3_eq^2 >= 4*A*m*g*z (same tolerance band
    around the threshold as the spectral classifier, so the two verdicts
    always agree).  Below the threshold the verdict carries the
    constructive WitnessFamily.
    """
    if not math.isfinite(M3_eq):
        raise ValueError(f"M3_eq must be finite, got {M3_eq!r}")
    margin = spin_margin(params, M3_eq)
    isolated = margin >= -margin_tolerance(params, M3_eq)
    return IsolationVerdict(
        isolated=isolated,
        margin=margin,
        threshold=params.critical_spin(),
        witness_family=None if isolated else WitnessFamily(params, M3_eq),
    )


@dataclass(frozen=True)
class GridSearchResult:
    """Smallest normalized third-equation residual over the scanned grid,
    and the grid point attaining it."""

    min_residual: float
    gamma3: float
    delta: float


def grid_search_oracle(
    params: TopParams,
    M3_eq: float,
    radius: float,
    n_gamma3: int,
    n_angle: int,
) -> GridSearchResult:
    """Brute-force check of the isolation dichotomy, independent of the
    closed-form constructions.

    Scans gamma3 in [1 - radius, 1) and the phase difference delta in
    [0, pi].  At each grid point u and v are fixed exactly by the first
    two reduced equations, so the only freedom is the third equation; its
    residual |u*v*cos(delta) - M3_eq*(1 - gamma3)|, normalized by
    (1 - gamma3), is returned minimized over the grid.

    Above the threshold the minimum is bounded below by
    |M3_eq| - 2*sqrt(A*m*g*z) > 0 for every grid resolution; below the
    threshold it approaches 0 as the grid refines.  Ties break toward the
    lowest gamma3, then the lowest delta.
    """
    if not 0.0 < radius < 1.0:
        raise ValueError(f"radius must lie in (0, 1), got {radius!r}")
    if n_gamma3 < 1 or n_angle < 2:
        raise ValueError("need n_gamma3 >= 1 and n_angle >= 2")

    gamma3 = np.linspace(1.0 - radius, 1.0, n_gamma3, endpoint=False)
    delta = np.linspace(0.0, np.pi, n_angle)
    w = (1.0 - gamma3)[:, None]  # > 0 on the whole grid
    u = np.sqrt(2.0 * params.A * params.mgz * w)
    v = np.sqrt(w * (1.0 + gamma3[:, None]))
    residual = np.abs(u * v * np.cos(delta)[None, :] - M3_eq * w) / w

    flat = int(np.argmin(residual))  # first minimum in C order: low gamma3, then low delta
    i, j = np.unravel_index(flat, residual.shape)
    return GridSearchResult(
        min_residual=float(residual[i, j]),
        gamma3=float(gamma3[i]),
        delta=float(delta[j]),
    )
