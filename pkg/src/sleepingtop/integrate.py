"""Fixed-step RK4 integration with conserved-quantity drift tracking.

The integrator is the classical 4th-order Runge-Kutta scheme.  It is not
structure preserving, so the four conserved quantities drift at O(h^4)
over a fixed horizon; the drift recorded alongside the trajectory is the
primary accuracy diagnostic.  The axial momentum M3 is an exception: its
time derivative is the literal constant 0.0 (see core.rhs), so it is
reproduced bit-for-bit.

gamma is not renormalized unless ``project_gamma`` is set, so that the C1
drift stays an honest error measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConservedSet, TopParams, TopState, _rhs6, conserved

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "IntegrationBlowupError",
    "step_rk4",
    "integrate",
    "drift_report",
    "write_trajectory_csv",
    "TRAJECTORY_CSV_HEADER",
]

TRAJECTORY_CSV_HEADER = "t,M1,M2,M3,g1,g2,g3,dH,dC1,dC2,dF"


class IntegrationBlowupError(RuntimeError):
    """Raised when the state picks up a non-finite component."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite state after step {step}")


@dataclass(frozen=True)
class IntegrationConfig:
    """Fixed-step integration settings.

    step: time step h in seconds.
    n_steps: number of RK4 steps to take.
    project_gamma: rescale gamma to unit norm after every step.
    record_every: keep every k-th step in the trajectory (the initial
        state is always recorded).
    """

    step: float = 1e-3
    n_steps: int = 200_000
    project_gamma: bool = False
    record_every: int = 1

    def __post_init__(self):
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise ValueError(f"step must be finite and > 0, got {self.step!r}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps!r}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every!r}")


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one integration run.

    times: (n,) sample times, strictly increasing, starting at 0.
    states: (n, 6) rows of (M1, M2, M3, g1, g2, g3).
    drift: (n, 4) rows of conserved-quantity deviations
        (dH, dC1, dC2, dF) from the initial state.
    """

    times: np.ndarray
    states: np.ndarray
    drift: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, i: int) -> TopState:
        return TopState.from_array(self.states[i])

    def deviation_from(self, reference: TopState) -> np.ndarray:
        """Euclidean distance of every sample from a reference state."""
        return np.linalg.norm(self.states - reference.as_array(), axis=1)


def _rk4_step(A, C, mgz, y, h):
    """One RK4 step on the plain-float 6-tuple y."""
    m1, m2, m3, g1, g2, g3 = y
    a1, a2, a3, a4, a5, a6 = _rhs6(A, C, mgz, m1, m2, m3, g1, g2, g3)
    h2 = 0.5 * h
    b1, b2, b3, b4, b5, b6 = _rhs6(
        A, C, mgz,
        m1 + h2 * a1, m2 + h2 * a2, m3 + h2 * a3,
        g1 + h2 * a4, g2 + h2 * a5, g3 + h2 * a6,
    )
    c1, c2, c3, c4, c5, c6 = _rhs6(
        A, C, mgz,
        m1 + h2 * b1, m2 + h2 * b2, m3 + h2 * b3,
        g1 + h2 * b4, g2 + h2 * b5, g3 + h2 * b6,
    )
    d1, d2, d3, d4, d5, d6 = _rhs6(
        A, C, mgz,
        m1 + h * c1, m2 + h * c2, m3 + h * c3,
        g1 + h * c4, g2 + h * c5, g3 + h * c6,
    )
    s = h / 6.0
    return (
        m1 + s * (a1 + 2.0 * (b1 + c1) + d1),
        m2 + s * (a2 + 2.0 * (b2 + c2) + d2),
        m3 + s * (a3 + 2.0 * (b3 + c3) + d3),
        g1 + s * (a4 + 2.0 * (b4 + c4) + d4),
        g2 + s * (a5 + 2.0 * (b5 + c5) + d5),
        g3 + s * (a6 + 2.0 * (b6 + c6) + d6),
    )


def _all_finite(y) -> bool:
    return (
        math.isfinite(y[0]) and math.isfinite(y[1]) and math.isfinite(y[2])
        and math.isfinite(y[3]) and math.isfinite(y[4]) and math.isfinite(y[5])
    )


def step_rk4(params: TopParams, state: TopState, h: float) -> TopState:
    """Advance one RK4 step of size h.

    An exact vertical equilibrium is a fixed point of this map bit for
    bit, because every stage derivative evaluates to exact zeros there.
    Raises IntegrationBlowupError if the result is non-finite.
    """
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"h must be finite and > 0, got {h!r}")
    try:
        y = _rk4_step(params.A, params.C, params.mgz, tuple(map(float, state.as_array())), h)
    except OverflowError:
        raise IntegrationBlowupError(1) from None
    if not _all_finite(y):
        raise IntegrationBlowupError(1)
    return TopState(M=np.array(y[:3]), gamma=np.array(y[3:]))


def integrate(
    params: TopParams, initial: TopState, config: IntegrationConfig
) -> Trajectory:
    """Integrate from ``initial`` and record the sampled trajectory.

    The initial gamma must be a unit vector to within 1e-9.  Aborts with
    IntegrationBlowupError (carrying the step index) as soon as any state
    component turns non-finite.
    """
    gnorm = float(np.linalg.norm(initial.gamma))
    if abs(gnorm - 1.0) > 1e-9:
        raise ValueError(f"initial gamma norm {gnorm} is not 1 within 1e-9")

    A, C, mgz = params.A, params.C, params.mgz
    h = config.step
    ref = conserved(params, initial).as_array()

    n_rec = 1 + config.n_steps // config.record_every
    times = np.empty(n_rec)
    states = np.empty((n_rec, 6))
    drift = np.empty((n_rec, 4))

    y = tuple(map(float, initial.as_array()))

    def record(k, step_index, yy):
        times[k] = step_index * h
        states[k] = yy
        vals = conserved(params, TopState.from_array(np.array(yy)))
        drift[k] = vals.as_array() - ref

    record(0, 0, y)
    k = 1
    for i in range(1, config.n_steps + 1):
        try:
            y = _rk4_step(A, C, mgz, y, h)
        except OverflowError:
            raise IntegrationBlowupError(i) from None
        if not _all_finite(y):
            raise IntegrationBlowupError(i)
        if config.project_gamma:
            m1, m2, m3, g1, g2, g3 = y
            inv = 1.0 / math.sqrt(g1 * g1 + g2 * g2 + g3 * g3)
            y = (m1, m2, m3, g1 * inv, g2 * inv, g3 * inv)
        if i % config.record_every == 0:
            record(k, i, y)
            k += 1
    return Trajectory(times=times, states=states, drift=drift)


def drift_report(traj: Trajectory) -> ConservedSet:
    """Max absolute drift of each conserved quantity over the trajectory,
    packaged as a ConservedSet of per-quantity deviations."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    m = np.max(np.abs(traj.drift), axis=0)
    return ConservedSet(H=float(m[0]), C1=float(m[1]), C2=float(m[2]), F=float(m[3]))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write the trajectory in the t,M1..g3,dH..dF column format with
    17-significant-digit floats."""
    with open(path, "w", newline="") as f:
        f.write(TRAJECTORY_CSV_HEADER + "\n")
        for t, y, d in zip(traj.times, traj.states, traj.drift):
            row = [t, *y, *d]
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")
