import time

import numpy as np
import pytest

from alleefront.toeplitz import (
    LevinsonBreakdown,
    dense_solve,
    levinson_solve,
)
from conftest import random_dd_system

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def test_identity_system():
    x = levinson_solve(np.array([1.0, 0.0, 0.0]), np.array([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(x, [3.0, -1.0, 2.0], atol=1e-15)


def test_worked_three_by_three():
    # dense elimination on [[2,1,0],[1,2,1],[0,1,2]] b=(1,1,1): by symmetry
    # x0 = x2, 2x0 + x1 = 1 and 2x0 + 2x1 = 1, so x1 = 0, x0 = 1/2
    row = np.array([2.0, 1.0, 0.0])
    rhs = np.array([1.0, 1.0, 1.0])
    x = levinson_solve(row, rhs)
    np.testing.assert_allclose(x, [0.5, 0.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(dense_solve(row, rhs), [0.5, 0.0, 0.5], atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 17, 64, 256])
def test_matches_dense_oracle(rng, n):
    row, rhs = random_dd_system(rng, n)
    x = levinson_solve(row, rhs)
    xd = dense_solve(row, rhs)
    assert np.max(np.abs(x - xd)) <= 1e-8 * np.max(np.abs(xd))


def test_recovers_planted_solution(rng):
    n = 200
    row, _ = random_dd_system(rng, n)
    x_true = rng.rand(n)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    rhs = row[idx] @ x_true
    x = levinson_solve(row, rhs)
    assert np.max(np.abs(x - x_true)) <= 1e-9 * np.max(np.abs(x_true))


def test_residual_guarantee(rng):
    n = 333
    row, rhs = random_dd_system(rng, n)
    x = levinson_solve(row, rhs)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    res = np.max(np.abs(row[idx] @ x - rhs))
    assert res <= 1e-10 * (1.0 + np.max(np.abs(rhs)))


def test_breakdown_reported():
    # toeplitz([1, 1]) is singular: the first reflection coefficient hits 1
    with pytest.raises(LevinsonBreakdown):
        levinson_solve(np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(LevinsonBreakdown):
        levinson_solve(np.array([0.0, 1.0]), np.array([1.0, 2.0]))


def test_shape_validation():
    with pytest.raises(ValueError):
        levinson_solve(np.array([1.0, 0.0]), np.array([1.0]))


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_cores_agree(rng):
    for n in (1, 2, 5, 100):
        row, rhs = random_dd_system(rng, n)
        a = levinson_solve(row, rhs, core="numpy")
        b = levinson_solve(row, rhs, core="numba")
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def _median_time(fn, repeats=7):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return np.median(out)


def test_cost_scales_quadratically(rng):
    # coarse performance guard: doubling n should cost roughly 4x
    n = 1536
    row1, rhs1 = random_dd_system(rng, n)
    row2, rhs2 = random_dd_system(rng, 2 * n)
    levinson_solve(row1, rhs1)  # warm up (jit compile, caches)
    levinson_solve(row2, rhs2)
    t1 = _median_time(lambda: levinson_solve(row1, rhs1))
    t2 = _median_time(lambda: levinson_solve(row2, rhs2))
    assert 3.0 <= t2 / t1 <= 6.0, "timing ratio %.2f outside [3, 6]" % (t2 / t1)
