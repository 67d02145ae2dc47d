"""Symmetric Toeplitz solves via the Levinson recursion.

The implicit diffusion step produces a strictly diagonally dominant symmetric
Toeplitz system at every time step; the Levinson recursion solves it in
O(n^2) operations without forming the matrix.  A compiled (numba) core is
used when available, with a pure-numpy implementation of the same recursion
as fallback.  The dense-elimination oracle used by the tests lives in
``dense_solve`` and is never called by production code.
"""

from __future__ import annotations

import numpy as np

__all__ = ["levinson_solve", "dense_solve", "LevinsonBreakdown"]

# reflection denominators below this threshold abort the recursion: the
# residual guarantee is void once the principal minors degenerate
_BREAKDOWN_TOL = 1e-300


class LevinsonBreakdown(RuntimeError):
    """Raised when a reflection denominator vanishes during the recursion."""

    def __init__(self, step, value):
        super().__init__(
            "Levinson breakdown at step %d (denominator %.3e); "
            "the system is (near-)singular" % (step, value)
        )
        self.step = step
        self.value = value


def _levinson_numpy(t, b):
    """Levinson recursion for toeplitz(t * r0) x = b * r0, t[0] = 1.

    Returns (x, breakdown_step); breakdown_step < 0 means success.
    """
    n = b.shape[0]
    x = np.empty(n)
    y = np.empty(n)
    x[0] = b[0]
    if n == 1:
        return x, -1
    beta = 1.0
    alpha = -t[1]
    y[0] = alpha
    for k in range(n - 1):
        beta = (1.0 - alpha * alpha) * beta
        if abs(beta) < _BREAKDOWN_TOL:
            return x, k
        yk = y[k::-1]
        mu = (b[k + 1] - np.dot(t[1 : k + 2], x[k::-1])) / beta
        x[: k + 1] += mu * yk
        x[k + 1] = mu
        if k < n - 2:
            alpha = -(t[k + 2] + np.dot(t[1 : k + 2], yk)) / beta
            y[: k + 1] = y[: k + 1] + alpha * yk
            y[k + 1] = alpha
    return x, -1


try:
    import numba as _numba

    @_numba.njit(cache=True)
    def _levinson_numba(t, b):  # pragma: no cover - exercised via dispatcher
        n = b.shape[0]
        x = np.empty(n)
        y = np.empty(n)
        x[0] = b[0]
        if n == 1:
            return x, -1
        beta = 1.0
        alpha = -t[1]
        y[0] = alpha
        for k in range(n - 1):
            beta = (1.0 - alpha * alpha) * beta
            if abs(beta) < _BREAKDOWN_TOL:
                return x, k
            acc = 0.0
            for i in range(k + 1):
                acc += t[1 + i] * x[k - i]
            mu = (b[k + 1] - acc) / beta
            half = (k + 1) // 2
            for i in range(half):
                j = k - i
                xi = x[i] + mu * y[j]
                xj = x[j] + mu * y[i]
                x[i] = xi
                x[j] = xj
            if (k + 1) % 2 == 1:
                x[half] += mu * y[half]
            x[k + 1] = mu
            if k < n - 2:
                acc = 0.0
                for i in range(k + 1):
                    acc += t[1 + i] * y[k - i]
                alpha = -(t[k + 2] + acc) / beta
                for i in range(half):
                    j = k - i
                    yi = y[i] + alpha * y[j]
                    yj = y[j] + alpha * y[i]
                    y[i] = yi
                    y[j] = yj
                if (k + 1) % 2 == 1:
                    y[half] *= 1.0 + alpha
                y[k + 1] = alpha
        return x, -1

    _CORE = _levinson_numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _CORE = None


def levinson_solve(first_row, rhs, core="auto"):
    """Solve toeplitz(first_row) x = rhs for a symmetric Toeplitz matrix.

    Parameters
    ----------
    first_row : (n,) array
        First row (equivalently first column) of the matrix; first_row[0]
        must be nonzero.
    rhs : (n,) array
        Right-hand side.
    core : {"auto", "numba", "numpy"}
        Implementation selector; "auto" prefers the compiled core.

    Raises
    ------
    LevinsonBreakdown
        If a reflection denominator vanishes.  Callers may fall back to the
        dense oracle; for the diagonally dominant systems produced by the
        operator assembly this cannot occur.
    """
    r = np.ascontiguousarray(first_row, dtype=float)
    b = np.ascontiguousarray(rhs, dtype=float)
    if r.ndim != 1 or b.ndim != 1 or r.shape[0] != b.shape[0]:
        raise ValueError(
            "first_row and rhs must be 1-d with matching length, got %r and %r"
            % (r.shape, b.shape)
        )
    if r.shape[0] == 0:
        return np.empty(0)
    if r[0] == 0.0:
        raise LevinsonBreakdown(0, 0.0)
    t = r / r[0]
    bn = b / r[0]
    if core == "numpy" or (core == "auto" and _CORE is None):
        x, bad = _levinson_numpy(t, bn)
    elif core in ("auto", "numba"):
        if _CORE is None:
            raise RuntimeError("numba core requested but numba is unavailable")
        x, bad = _CORE(t, bn)
    else:
        raise ValueError("unknown core %r" % (core,))
    if bad >= 0:
        raise LevinsonBreakdown(bad, 0.0)
    return x


def dense_solve(first_row, rhs):
    """Dense-elimination oracle: forms the full matrix and LU-solves it.

    Test-only reference path, O(n^3); production code never calls it.
    """
    r = np.asarray(first_row, dtype=float)
    n = r.shape[0]
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return np.linalg.solve(r[idx], np.asarray(rhs, dtype=float))
