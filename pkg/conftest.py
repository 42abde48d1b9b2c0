import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from rnapbound.energy.model import load_params  # noqa: E402


@pytest.fixture(scope='session')
def model():
    """Energy model of the bundled parameter file."""
    return load_params()


@pytest.fixture
def rng():
    return np.random.default_rng(7)
