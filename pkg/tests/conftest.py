import numpy as np
import pytest

from bpl.config import SpectralConfig


def draw_complex(rng, shape=()):
    z = rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-0.5, 0.5, shape)
    return complex(z) if shape == () else z


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def cfg3():
    return SpectralConfig.random_instance(3, 2, seed=11)


@pytest.fixture
def cfg2():
    return SpectralConfig.random_instance(2, 1, seed=7)
