"""Linearization at the vertical rotation and spectral classification.

The Jacobian of the Euler-Poisson field at the equilibrium
(0, 0, M3, 0, 0, 1) decouples: the rows for dM3 and dgamma3 vanish, and
the transverse block in the variables (m1, m2, gam1, gam2) reads, with
a = M3*(1/C - 1/A) and b = m*g*z,

    dm1   =  a*m2   + b*gam2
    dm2   = -a*m1   - b*gam1
    dgam1 = (M3/C)*gam2 - m2/A
    dgam2 = m1/A - (M3/C)*gam1

Complexifying with zeta = m1 + i*m2, eta = gam1 + i*gam2 turns this into
a 2x2 linear system whose characteristic polynomial is

    lam^2 + i*(a + M3/C)*lam - (a*M3/C + m*g*z/A) = 0.

Writing s = a + M3/C and p = a*M3/C + m*g*z/A, the discriminant
4p - s^2 simplifies to (4*A*m*g*z - M3^2)/A^2, so the four transverse
eigenvalues (the two roots plus their conjugates) are purely imaginary
exactly when M3^2 >= 4*A*m*g*z, and otherwise a pair of them has real
part +sqrt(4*A*m*g*z - M3^2)/(2*A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TopParams, TopState, margin_tolerance, spin_margin
from .integrate import Trajectory

__all__ = [
    "SpectralReport",
    "FitWindowError",
    "jacobian",
    "eigenvalues",
    "classify_spectral",
    "measured_growth_rate",
    "select_fit_window",
]


class FitWindowError(ValueError):
    """Raised when a growth-rate fit window is unusable (outside the
    linear regime, or too short)."""


@dataclass(frozen=True)
class SpectralReport:
    """Spectral verdict for one vertical rotation.

    eigenvalues: the four transverse eigenvalues (the remaining two
        eigenvalues of the full 6x6 Jacobian are exactly zero).
    stable: True when M3^2 >= 4*A*m*g*z, within the classification
        tolerance of the threshold.
    growth_rate: max real part of the eigenvalues, in 1/s; reported as
        0.0 for stable verdicts (real parts inside the threshold
        tolerance band are rounding noise).
    threshold: the critical spin 2*sqrt(A*m*g*z).
    margin: M3^2 - 4*A*m*g*z.
    """

    eigenvalues: tuple[complex, complex, complex, complex]
    stable: bool
    growth_rate: float
    threshold: float
    margin: float

    @property
    def verdict(self) -> str:
        return "SpectrallyStable" if self.stable else "SpectrallyUnstable"


def jacobian(params: TopParams, M3: float) -> np.ndarray:
    """Exact 6x6 derivative of the vector field at equilibrium(M3), in the
    state ordering (M1, M2, M3, g1, g2, g3)."""
    a = M3 * (1.0 / params.C - 1.0 / params.A)
    b = params.mgz
    w3 = M3 / params.C
    J = np.zeros((6, 6))
    J[0, 1] = a
    J[0, 4] = b
    J[1, 0] = -a
    J[1, 3] = -b
    J[3, 1] = -1.0 / params.A
    J[3, 4] = w3
    J[4, 0] = 1.0 / params.A
    J[4, 3] = -w3
    return J


def _quadratic_coefficients(params: TopParams, M3: float) -> tuple[float, float]:
    """Coefficients (s, p) of lam^2 + i*s*lam - p = 0 for the complexified
    transverse block."""
    a = M3 * (1.0 / params.C - 1.0 / params.A)
    s = a + M3 / params.C
    p = a * M3 / params.C + params.mgz / params.A
    return s, p


def eigenvalues(params: TopParams, M3: float) -> np.ndarray:
    """The four transverse eigenvalues at equilibrium(M3).

    Computed from the closed-form quadratic, not a matrix eigensolver:
    the two roots of lam^2 + i*s*lam - p together with their complex
    conjugates.  Stable spectra come out with real part exactly 0.0.
    """
    s, p = _quadratic_coefficients(params, M3)
    disc = 4.0 * p - s * s  # equals (4*A*m*g*z - M3^2)/A^2
    if disc > 0.0:
        re = 0.5 * math.sqrt(disc)
        lam1 = complex(re, -0.5 * s)
        lam2 = complex(-re, -0.5 * s)
    else:
        root = 0.5 * math.sqrt(-disc)
        lam1 = complex(0.0, -0.5 * s + root)
        lam2 = complex(0.0, -0.5 * s - root)
    eigs = np.array([lam1, lam2, lam1.conjugate(), lam2.conjugate()])
    order = np.lexsort((eigs.imag, -eigs.real))
    return eigs[order]


def classify_spectral(params: TopParams, M3: float) -> SpectralReport:
    """Classify the vertical rotation spectrally.

    Two independent routes must agree: the sign of the closed-form margin
    M3^2 - 4*A*m*g*z, and the real parts of the computed eigenvalues.
    Both use the same tolerance band around the threshold (see
    core.margin_tolerance), inside which the rotation is classified
    stable with growth rate 0, matching the behavior proved to hold at
    exact equality.
    """
    if not math.isfinite(M3):
        raise ValueError(f"M3 must be finite, got {M3!r}")
    margin = spin_margin(params, M3)
    tol = margin_tolerance(params, M3)
    stable = margin >= -tol

    eigs = eigenvalues(params, M3)
    growth_raw = float(eigs.real.max())
    # Image of the margin tolerance under growth = sqrt(-margin)/(2A).
    eig_stable = growth_raw <= math.sqrt(tol) / (2.0 * params.A)
    if eig_stable != stable:
        raise RuntimeError(
            f"spectral routes disagree at M3={M3}: margin={margin}, "
            f"max Re lambda={growth_raw}"
        )
    return SpectralReport(
        eigenvalues=tuple(eigs),
        stable=stable,
        growth_rate=0.0 if stable else growth_raw,
        threshold=params.critical_spin(),
        margin=margin,
    )


def select_fit_window(
    traj: Trajectory,
    reference: TopState,
    lower_factor: float = 10.0,
    upper: float = 1e-2,
) -> slice:
    """Pick the index window of clean exponential growth for a perturbed
    unstable run: from where the deviation first exceeds ``lower_factor``
    times its initial value until it first exceeds ``upper``.
    """
    dev = traj.deviation_from(reference)
    d0 = dev[0]
    if d0 <= 0.0:
        raise FitWindowError("initial state coincides with the reference")
    grown = np.nonzero(dev >= lower_factor * d0)[0]
    if grown.size == 0:
        raise FitWindowError(
            f"deviation never grew past {lower_factor} x initial; "
            "nothing to fit"
        )
    start = int(grown[0])
    beyond = np.nonzero(dev[start:] > upper)[0]
    stop = start + int(beyond[0]) if beyond.size else len(dev)
    if stop - start < 2:
        raise FitWindowError("growth window spans fewer than 2 samples")
    return slice(start, stop)


def measured_growth_rate(
    traj: Trajectory,
    reference: TopState,
    fit_window,
    linear_threshold: float = 1e-2,
) -> float:
    """Least-squares slope of log ||state - reference|| over the window.

    ``fit_window`` is a slice or (start, stop) index pair into the
    recorded samples.  The samples in the window must stay within
    ``linear_threshold`` of the reference, otherwise the run has left the
    linear regime and the fit would be meaningless (FitWindowError).
    """
    if not isinstance(fit_window, slice):
        fit_window = slice(*fit_window)
    dev = traj.deviation_from(reference)[fit_window]
    t = traj.times[fit_window]
    if dev.size < 2:
        raise FitWindowError("fit window has fewer than 2 samples")
    peak = float(dev.max())
    if peak > linear_threshold:
        raise FitWindowError(
            f"window leaves the linear regime: max deviation {peak:.3g} "
            f"> {linear_threshold:.3g}"
        )
    if dev.min() <= 0.0:
        raise FitWindowError("deviation vanishes inside the window")
    slope, _ = np.polyfit(t, np.log(dev), 1)
    return float(slope)
