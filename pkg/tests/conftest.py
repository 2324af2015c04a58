import numpy as np
import pytest

from app.core.quad import hopf_rule


@pytest.fixture(scope="session")
def circle_rule():
    return hopf_rule(1, angular_points=256)


@pytest.fixture(scope="session")
def sphere3_rule():
    """Product rule on S^3 accurate to ~1e-10 for smooth toric integrands."""
    return hopf_rule(2, 32, 64)


@pytest.fixture(scope="session")
def coarse_rule():
    return hopf_rule(2, 16, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
