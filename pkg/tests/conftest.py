import numpy as np
import pytest

from claw.config import build_initial


@pytest.fixture
def random_pq():
    """Factory for seeded random particle systems from the pinned generator."""

    def make(seed, n=256):
        return build_initial({"preset": f"random({seed})"}, n)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
