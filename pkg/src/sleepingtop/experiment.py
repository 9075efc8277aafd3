"""Experiment harness: perturbed runs and threshold sweeps.

A sweep classifies each requested spin three ways (closed-form margin,
eigenvalues, isolation certificate), integrates a randomly perturbed
trajectory, and records deviation and drift statistics as one CSV row
per spin.  Rows are seeded individually, so results do not depend on
execution order, and all output is byte-deterministic for a fixed
(config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TopParams, TopState, equilibrium, margin_tolerance, spin_margin
from .integrate import (
    IntegrationBlowupError,
    IntegrationConfig,
    Trajectory,
    drift_report,
    integrate,
)
from .levelset import certify_isolation
from .linear import FitWindowError, classify_spectral, measured_growth_rate, select_fit_window

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "SWEEP_CSV_HEADER",
    "make_perturbed_state",
    "run_single",
    "run_sweep",
    "write_sweep_csv",
    "format_float",
]

SWEEP_CSV_HEADER = (
    "m3,threshold_margin,spectral_verdict,growth_rate_predicted,"
    "growth_rate_measured,max_deviation,drift_H,drift_C1,drift_C2,drift_F"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep or simulation request.

    perturbation is the magnitude added transversally to both M and gamma
    (0 means start exactly at the equilibrium); seed feeds the random
    perturbation directions.
    """

    params: TopParams
    m3_values: tuple[float, ...]
    perturbation: float = 1e-4
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if len(self.m3_values) == 0:
            raise ValueError("m3_values must be non-empty")
        if not (self.perturbation >= 0.0 and math.isfinite(self.perturbation)):
            raise ValueError(
                f"perturbation must be finite and >= 0, got {self.perturbation!r}"
            )
        object.__setattr__(self, "m3_values", tuple(float(v) for v in self.m3_values))


@dataclass(frozen=True)
class SweepRow:
    """One sweep result; field order is the CSV column order."""

    m3: float
    threshold_margin: float
    spectral_verdict: str
    growth_rate_predicted: float
    growth_rate_measured: float | None
    max_deviation: float
    drift_H: float
    drift_C1: float
    drift_C2: float
    drift_F: float


def make_perturbed_state(
    params: TopParams, m3: float, magnitude: float, rng: np.random.Generator
) -> TopState:
    """Equilibrium(m3) nudged by ``magnitude`` in random transverse
    directions of M and gamma (independent angles); gamma is renormalized
    to unit length.  magnitude 0 returns the exact equilibrium."""
    psi_m = rng.uniform(0.0, 2.0 * np.pi)
    psi_g = rng.uniform(0.0, 2.0 * np.pi)
    M = np.array([magnitude * np.cos(psi_m), magnitude * np.sin(psi_m), m3])
    gamma = np.array([magnitude * np.cos(psi_g), magnitude * np.sin(psi_g), 1.0])
    gamma /= np.linalg.norm(gamma)
    return TopState(M=M, gamma=gamma)


def _classify_all_ways(params: TopParams, m3: float) -> tuple[bool, float, float]:
    """Closed form, eigenvalues, and isolation certificate must all give
    one verdict; returns (stable, margin, predicted growth rate)."""
    closed_form = spin_margin(params, m3) >= -margin_tolerance(params, m3)
    report = classify_spectral(params, m3)  # asserts eigenvalue route agrees
    cert = certify_isolation(params, m3)
    if not closed_form == report.stable == cert.isolated:
        raise RuntimeError(
            f"stability methods disagree at m3={m3}: closed-form {closed_form}, "
            f"spectral {report.stable}, isolation {cert.isolated}"
        )
    return report.stable, report.margin, report.growth_rate


def run_single(
    config: ExperimentConfig, m3: float, row_index: int = 0
) -> tuple[TopState, Trajectory]:
    """Integrate one perturbed run for ``m3``; returns (initial, trajectory).

    Raises IntegrationBlowupError like the integrator does.
    """
    rng = np.random.default_rng([config.seed, row_index])
    initial = make_perturbed_state(config.params, m3, config.perturbation, rng)
    return initial, integrate(config.params, initial, config.integration)


def run_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Classify, perturb, and integrate every m3 in the config.

    Rows come back ordered by m3.  A run that blows up is recorded with
    max_deviation = inf and NaN drifts instead of aborting the sweep.
    Growth rates are measured only for unstable rows, from the window
    where the deviation grows but stays within the linear regime.
    """
    rows = []
    for i, m3 in enumerate(sorted(config.m3_values)):
        stable, margin, predicted = _classify_all_ways(config.params, m3)
        eq = equilibrium(m3)
        measured: float | None = None
        try:
            _, traj = run_single(config, m3, row_index=i)
        except IntegrationBlowupError:
            max_dev = math.inf
            drifts = (math.nan,) * 4
        else:
            max_dev = float(traj.deviation_from(eq).max())
            rep = drift_report(traj)
            drifts = (rep.H, rep.C1, rep.C2, rep.F)
            if not stable:
                try:
                    window = select_fit_window(traj, eq)
                    measured = measured_growth_rate(traj, eq, window)
                except FitWindowError:
                    measured = None
        rows.append(
            SweepRow(
                m3=m3,
                threshold_margin=margin,
                spectral_verdict="STABLE" if stable else "UNSTABLE",
                growth_rate_predicted=predicted,
                growth_rate_measured=measured,
                max_deviation=max_dev,
                drift_H=drifts[0],
                drift_C1=drifts[1],
                drift_C2=drifts[2],
                drift_F=drifts[3],
            )
        )
    return rows


def format_float(x: float) -> str:
    """CSV float rendering: 17 significant digits round-trips exactly."""
    return f"{x:.17g}"


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as f:
        f.write(SWEEP_CSV_HEADER + "\n")
        for r in rows:
            fields = [
                format_float(r.m3),
                format_float(r.threshold_margin),
                r.spectral_verdict,
                format_float(r.growth_rate_predicted),
                "" if r.growth_rate_measured is None else format_float(r.growth_rate_measured),
                format_float(r.max_deviation),
                format_float(r.drift_H),
                format_float(r.drift_C1),
                format_float(r.drift_C2),
                format_float(r.drift_F),
            ]
            f.write(",".join(fields) + "\n")
