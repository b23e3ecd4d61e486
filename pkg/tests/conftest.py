import numpy as np
import pytest

from spincm import tol_scale


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tol():
    """Scale a tolerance by SPINCM_TOL_SCALE."""
    scale = tol_scale()
    return lambda value: value * scale
