import numpy as np
import pytest

from sleepingtop import TopParams, TopState


@pytest.fixture
def unit_params():
    """Canonical parameter set: every constant 1, critical spin exactly 2."""
    return TopParams(A=1.0, C=1.0, m=1.0, g=1.0, z=1.0)


def random_params(rng) -> TopParams:
    """Random valid parameters with C <= 2A (no warning spam)."""
    A = rng.uniform(0.3, 3.0)
    return TopParams(
        A=A,
        C=rng.uniform(0.3, min(2.0 * A, 3.0)),
        m=rng.uniform(0.3, 3.0),
        g=rng.uniform(0.3, 3.0),
        z=rng.uniform(0.3, 3.0),
    )


def random_state(rng, m_scale=2.0) -> TopState:
    gamma = rng.uniform(-1.0, 1.0, 3)
    gamma /= np.linalg.norm(gamma)
    return TopState(M=rng.uniform(-m_scale, m_scale, 3), gamma=gamma)


def unit_gamma(*components) -> np.ndarray:
    g = np.asarray(components, dtype=float)
    return g / np.linalg.norm(g)
