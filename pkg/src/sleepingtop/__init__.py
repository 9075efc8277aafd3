"""Stability of the sleeping (vertical) rotation of a symmetric heavy top.

The same threshold, the critical spin 2*sqrt(A*m*g*z), is reached three
independent ways: a closed-form margin test, the spectrum of the
linearization, and isolation of the equilibrium inside the level set of
the four conserved quantities.  A fixed-step integrator with drift
monitoring backs the verdicts with trajectories.
"""

from .core import (
    ConservedSet,
    TopParams,
    TopState,
    conserved,
    equilibrium,
    m3_from_omega,
    margin_tolerance,
    rhs,
    spin_margin,
)
from .experiment import (
    ExperimentConfig,
    SweepRow,
    make_perturbed_state,
    run_single,
    run_sweep,
    write_sweep_csv,
)
from .integrate import (
    IntegrationBlowupError,
    IntegrationConfig,
    Trajectory,
    drift_report,
    integrate,
    step_rk4,
    write_trajectory_csv,
)
from .levelset import (
    GridSearchResult,
    IsolationVerdict,
    ReducedPoint,
    WitnessFamily,
    certify_isolation,
    grid_search_oracle,
    level_residuals,
    reduced_residuals,
)
from .linear import (
    FitWindowError,
    SpectralReport,
    classify_spectral,
    eigenvalues,
    jacobian,
    measured_growth_rate,
    select_fit_window,
)

__version__ = "0.1.0"

__all__ = [
    "ConservedSet",
    "ExperimentConfig",
    "FitWindowError",
    "GridSearchResult",
    "IntegrationBlowupError",
    "IntegrationConfig",
    "IsolationVerdict",
    "ReducedPoint",
    "SpectralReport",
    "SweepRow",
    "TopParams",
    "TopState",
    "Trajectory",
    "WitnessFamily",
    "certify_isolation",
    "classify_spectral",
    "conserved",
    "drift_report",
    "eigenvalues",
    "equilibrium",
    "grid_search_oracle",
    "integrate",
    "jacobian",
    "level_residuals",
    "m3_from_omega",
    "make_perturbed_state",
    "margin_tolerance",
    "measured_growth_rate",
    "reduced_residuals",
    "rhs",
    "run_single",
    "run_sweep",
    "select_fit_window",
    "spin_margin",
    "step_rk4",
    "write_sweep_csv",
    "write_trajectory_csv",
]
