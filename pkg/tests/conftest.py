import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from klain.lab_utils.monte_carlo import MonteCarloConfig  # noqa: E402


@pytest.fixture
def small_mc():
    return MonteCarloConfig(samples=40000, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
