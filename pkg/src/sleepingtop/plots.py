"""Static figure rendering for trajectory and sweep reports.

Figures are written to files next to the CSV output; there is no
interactive display path, so the Agg backend is forced up front.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import TopState
from .experiment import SweepRow
from .integrate import Trajectory

__all__ = ["trajectory_figure", "sweep_figure", "figure_path_for"]

_DRIFT_LABELS = ("|dH|", "|dC1|", "|dC2|", "|dF|")


def figure_path_for(csv_path) -> Path:
    """Where the companion figure of a CSV report goes."""
    return Path(csv_path).with_suffix(".png")


def _semilog_safe(values: np.ndarray) -> np.ndarray:
    out = np.abs(values).astype(float)
    out[out == 0.0] = np.nan
    return out


def trajectory_figure(traj: Trajectory, reference: TopState | None = None):
    """Three panels: momentum components, gamma components, and the
    absolute conserved-quantity drift on a log scale."""
    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    t = traj.times

    for k, label in enumerate(("M1", "M2", "M3")):
        axes[0].plot(t, traj.states[:, k], label=label, lw=0.9)
    axes[0].set_ylabel("angular momentum")
    axes[0].legend(loc="upper right", fontsize=8)

    for k, label in enumerate(("g1", "g2", "g3")):
        axes[1].plot(t, traj.states[:, 3 + k], label=label, lw=0.9)
    axes[1].set_ylabel("gravity direction")
    axes[1].legend(loc="upper right", fontsize=8)

    for k, label in enumerate(_DRIFT_LABELS):
        axes[2].plot(t, _semilog_safe(traj.drift[:, k]), label=label, lw=0.9)
    axes[2].set_yscale("log")
    axes[2].set_ylabel("conserved drift")
    axes[2].set_xlabel("t [s]")
    axes[2].legend(loc="upper right", fontsize=8)

    if reference is not None:
        dev = traj.deviation_from(reference)
        ax = axes[0].twinx()
        ax.plot(t, dev, color="0.4", ls="--", lw=0.8)
        ax.set_ylabel("deviation from equilibrium", fontsize=8)

    fig.tight_layout()
    return fig


def sweep_figure(rows: list[SweepRow], threshold: float):
    """Growth rates and peak deviation across the swept spins."""
    fig, axes = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    m3 = np.array([r.m3 for r in rows])
    stable = np.array([r.spectral_verdict == "STABLE" for r in rows])

    predicted = np.array([r.growth_rate_predicted for r in rows])
    measured = np.array(
        [np.nan if r.growth_rate_measured is None else r.growth_rate_measured for r in rows]
    )
    axes[0].plot(m3, predicted, "o-", label="predicted growth rate")
    axes[0].plot(m3, measured, "s", mfc="none", label="measured growth rate")
    axes[0].axvline(threshold, color="0.5", ls=":", label=f"threshold {threshold:g}")
    axes[0].axvline(-threshold, color="0.5", ls=":")
    axes[0].set_ylabel("growth rate [1/s]")
    axes[0].legend(fontsize=8)

    dev = np.array([r.max_deviation for r in rows])
    axes[1].semilogy(m3[stable], dev[stable], "o", color="tab:blue", label="stable")
    axes[1].semilogy(m3[~stable], dev[~stable], "x", color="tab:red", label="unstable")
    axes[1].set_ylabel("max deviation")
    axes[1].set_xlabel("M3")
    axes[1].legend(fontsize=8)

    fig.tight_layout()
    return fig
