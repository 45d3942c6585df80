import numpy as np
import pytest

from ncqm_brackets.core.fields import GaugeField, GaugeSolver, NCProfile

# The worked example: θ = 0.1, α = 0.5, f(u) = u, probed at (1, 2)
THETA = 0.1
ALPHA = 0.5
POINT = (1.0, 2.0)

GRID_21 = np.linspace(-3.0, 3.0, 21)


@pytest.fixture
def example_profile() -> NCProfile:
    return NCProfile(theta=THETA, alpha=ALPHA, f_poly=(0.0, 1.0))


@pytest.fixture
def phi_field(example_profile: NCProfile) -> GaugeField:
    return GaugeSolver.solve_phi_gauge(example_profile)


@pytest.fixture
def chi_field(example_profile: NCProfile) -> GaugeField:
    return GaugeSolver.solve_chi_gauge(example_profile)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def grid_points(xs: np.ndarray, ys: np.ndarray | None = None) -> list[tuple[float, float]]:
    """Grid nodes in row-major order."""
    ys = xs if ys is None else ys
    return [(float(x), float(y)) for y in ys for x in xs]
