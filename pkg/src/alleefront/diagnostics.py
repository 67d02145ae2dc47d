"""Observables extracted from trajectories.

Level-line positions (rightmost crossing), acceleration exponents from
log-log least squares, algebraic tail fits C/x^{2s} (fixed and free
exponent), the flattening series C(t), the (s, beta) regime classification,
and the spectral-symbol oracle validating the discretization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .discretization import apply_nonlocal, ExteriorDatum
from .kernels import fractional_normalization

__all__ = [
    "LevelSeries",
    "ExponentFit",
    "TailFit",
    "RegimeReport",
    "FlatteningSeries",
    "level_position",
    "crossing_count",
    "exponent_fit",
    "tail_fit",
    "flattening_series",
    "regime_classify",
    "symbol_error",
]

EXP_EXPONENTIAL = "exponential"
EXP_ACCELERATING = "accelerating"
EXP_CRITICAL = "critical"
EXP_LINEAR = "linear-front"


def level_position(grid, lam):
    """Rightmost position where u reaches height lam, by linear interpolation.

    Returns (position, flag) with flag one of "ok", "none" (u < lam
    everywhere) and "all-above" (no down-crossing inside the grid; the
    position of the rightmost node is returned).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("level height must lie in (0, 1), got %r" % (lam,))
    u = grid.values
    x = grid.x()
    above = u >= lam
    if not above.any():
        return np.nan, "none"
    i = int(np.nonzero(above)[0][-1])
    if i == u.shape[0] - 1:
        return float(x[-1]), "all-above"
    if u[i] == lam:
        return float(x[i]), "ok"
    frac = (u[i] - lam) / (u[i] - u[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i])), "ok"


def crossing_count(grid, lam):
    """Number of down-crossings of height lam (sanity check for level lines)."""
    above = grid.values >= lam
    return int(np.sum(above[:-1] & ~above[1:]))


@dataclass
class LevelSeries:
    """Time series of positions of one level line."""

    lam: float
    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        if self.t.shape != self.x.shape:
            raise ValueError("times and positions must have matching shape")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("times must be strictly increasing")


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    rms_residual: float
    count: int
    window: tuple


def exponent_fit(series, t_window):
    """Least-squares slope of log x against log t inside a time window.

    Samples with undefined positions (NaN) are not samples; at least five
    defined samples with positive position are required.
    """
    lo, hi = t_window
    m = (series.t >= lo) & (series.t <= hi) & np.isfinite(series.x)
    t = series.t[m]
    x = series.x[m]
    if t.size < 5:
        raise ValueError(
            "insufficient samples in window [%g, %g]: %d < 5" % (lo, hi, t.size)
        )
    if np.any(x <= 0):
        raise ValueError("positions must be positive for the log-log fit")
    lt = np.log(t)
    lx = np.log(x)
    A = np.column_stack([lt, np.ones_like(lt)])
    coef, _, _, _ = np.linalg.lstsq(A, lx, rcond=None)
    resid = lx - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return ExponentFit(float(coef[0]), float(coef[1]), rms, int(t.size), (lo, hi))


@dataclass
class TailFit:
    """Algebraic tail fit u ~ C x^{exponent} over a value window."""

    C: float
    exponent: float
    window: tuple
    residual: float
    mode: str  # "fixed" or "free"
    count: int


def _tail_points(grid, value_window):
    lo, hi = value_window
    if not 0.0 < lo < hi:
        raise ValueError("value window must satisfy 0 < lo < hi, got %r" % (value_window,))
    u = grid.values
    x = grid.x()
    m = (x > 0) & (u > lo) & (u < hi)
    return x[m], u[m]


def tail_fit(grid, s, value_window):
    """Fit the tail within a value window; returns (fixed, free) fits.

    Fixed mode: linear least squares for C with the exponent pinned at -2s.
    Free mode: log-log regression yielding both amplitude and exponent.
    Residuals are relative RMS misfits in linear space.
    """
    x, u = _tail_points(grid, value_window)
    if x.size < 10:
        raise ValueError(
            "tail window %r selects %d points; need at least 10"
            % (value_window, int(x.size))
        )
    scale = float(np.sqrt(np.mean(u**2)))

    basis = x ** (-2.0 * s)
    C_fixed = float(np.dot(u, basis) / np.dot(basis, basis))
    res_fixed = float(np.sqrt(np.mean((u - C_fixed * basis) ** 2))) / scale
    fixed = TailFit(C_fixed, -2.0 * s, tuple(value_window), res_fixed, "fixed", x.size)

    lx = np.log(x)
    lu = np.log(u)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, _, _, _ = np.linalg.lstsq(A, lu, rcond=None)
    # clamp the intercept so degenerate (near-vertical) windows cannot
    # overflow the exponential; the huge residual still marks the bad fit
    C_free = float(np.exp(np.clip(coef[1], -700.0, 700.0)))
    with np.errstate(over="ignore", invalid="ignore"):
        res_free = float(np.sqrt(np.mean((u - C_free * x ** coef[0]) ** 2))) / scale
    if not np.isfinite(res_free):
        res_free = float("inf")
    free = TailFit(C_free, float(coef[0]), tuple(value_window), res_free, "free", x.size)
    return fixed, free


@dataclass
class FlatteningSeries:
    t: np.ndarray
    C: np.ndarray
    late_window: tuple
    linear_coef: tuple  # (slope, intercept) of the late-window linear fit
    max_rel_deviation: float


def flattening_series(snapshots, s, value_window, late_fraction=0.5):
    """Fixed-exponent tail amplitude per snapshot plus a late linear fit.

    The late window is the trailing ``late_fraction`` of the recorded times;
    the reported deviation is max |C - linfit| / |linfit| over that window.
    Empty-window failures in individual snapshots propagate.
    """
    if len(snapshots) < 3:
        raise ValueError("need at least 3 snapshots, got %d" % len(snapshots))
    ts = np.array([s_.t for s_ in snapshots], dtype=float)
    Cs = np.empty(ts.shape)
    for i, snapshot in enumerate(snapshots):
        fixed, _ = tail_fit(snapshot, s, value_window)
        Cs[i] = fixed.C
    t_lo = ts[-1] - late_fraction * (ts[-1] - ts[0])
    m = ts >= t_lo
    A = np.column_stack([ts[m], np.ones(int(m.sum()))])
    coef, _, _, _ = np.linalg.lstsq(A, Cs[m], rcond=None)
    fit = A @ coef
    dev = float(np.max(np.abs(Cs[m] - fit) / np.abs(fit)))
    return FlatteningSeries(ts, Cs, (float(t_lo), float(ts[-1])), (float(coef[0]), float(coef[1])), dev)


@dataclass
class RegimeReport:
    regime: str
    s: float
    beta: float
    exponent_p: Optional[float] = None

    def lines(self):
        out = [
            ("regime", self.regime),
            ("s", "%.17g" % self.s),
            ("beta", "%.17g" % self.beta),
        ]
        if self.exponent_p is not None:
            out.append(("exponent_p", "%.17g" % self.exponent_p))
        return out


def regime_classify(s, beta):
    """Propagation regime from (s, beta).

    beta = 1 is the KPP case (exponential propagation for these kernels);
    for beta > 1 the level lines scale like t^p with p = beta/(2s(beta-1)),
    super-linear exactly when p > 1 (equivalently s <= 1/2 or
    beta < 1 + 1/(2s - 1)).
    """
    if s <= 0:
        raise ValueError("s must be positive, got %r" % (s,))
    if beta < 1:
        raise ValueError("beta must be >= 1, got %r" % (beta,))
    if beta == 1.0:
        return RegimeReport(EXP_EXPONENTIAL, s, beta)
    p = beta / (2.0 * s * (beta - 1.0))
    if abs(p - 1.0) <= 1e-12:
        return RegimeReport(EXP_CRITICAL, s, beta, 1.0)
    if p > 1.0:
        return RegimeReport(EXP_ACCELERATING, s, beta, p)
    return RegimeReport(EXP_LINEAR, s, beta, p)


def symbol_error(spec, split_gamma, xi, dx, domain_halfwidth):
    """Relative spectral error of the discrete operator on cos(xi x).

    Applies the discretization to cos(xi x) with exact off-grid values and an
    analytic far-field correction, then compares against the exact symbol
    value -(norm_const / C_{1,s}) |xi|^{2s} cos(xi x) over the central half
    of the grid.  xi = 0 degenerates to the constant-annihilation check and
    returns the absolute error.
    """
    from .evolution import GridState  # local import to avoid a cycle

    if xi < 0:
        raise ValueError("xi must be nonnegative, got %r" % (xi,))
    s = spec.s
    W = float(domain_halfwidth)
    M = int(round(2.0 * W / dx))
    xs = -W + dx * np.arange(1, M)
    u = np.cos(xi * xs)
    grid = GridState(-W + dx, dx, u, ExteriorDatum(1.0, 1.0), 0.0)

    profile = lambda y: np.cos(xi * np.asarray(y, dtype=float))
    D = apply_nonlocal(grid, spec, split_gamma, profile=profile)

    # replace the crude constant far field by the exact cosine tail
    cutoff = (M - 1) * dx
    gl = float(profile(grid.left_x - dx - cutoff))
    gr = float(profile(grid.left_x + (M - 1) * dx + cutoff))
    D -= spec.norm_const * (gl + gr) / (2.0 * s * cutoff ** (2.0 * s))
    if xi == 0.0:
        icos = 1.0 / (2.0 * s * cutoff ** (2.0 * s))
    else:
        icos, _ = quad(
            lambda z: z ** (-1.0 - 2.0 * s),
            cutoff,
            np.inf,
            weight="cos",
            wvar=xi,
            limit=400,
        )
    D += spec.norm_const * 2.0 * u * icos

    ratio = spec.norm_const / fractional_normalization(s)
    exact = -ratio * xi ** (2.0 * s) * np.cos(xi * xs)
    central = np.abs(xs) <= W / 2.0
    err = np.max(np.abs(D[central] - exact[central]))
    if xi == 0.0:
        return float(err)
    return float(err / (ratio * xi ** (2.0 * s)))
