import numpy as np
import pytest

from mrio_equity.synthetic import random_economy, write_fixture


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixture_workspace(tmp_path):
    """A private copy of the bundled 3-region x 2-sector x 4-year economy."""
    return write_fixture(tmp_path / "ws")


@pytest.fixture
def small_economy(rng):
    return random_economy(rng, ("R1", "R2", "R3"), ("a", "b"), year=2001, spectral_radius=0.7)
