import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.RandomState(20240817)


def random_dd_system(rng, n):
    """Random strictly diagonally dominant symmetric Toeplitz first row."""
    off = -rng.rand(n - 1) / n  # nonpositive off-diagonals, like the stepper
    row = np.concatenate([[2.0 + rng.rand()], off])
    rhs = rng.rand(n) * 2.0 - 1.0
    return row, rhs
