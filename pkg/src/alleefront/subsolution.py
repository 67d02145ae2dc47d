"""Analytic barrier and subsolution machinery with numeric certification.

The short-time barrier v, the accelerated profile w and its cubic-polished
version u together with their geometry (the plateau edge X(t), the convexity
onset X_c(t) and the half-level Y(t)) are evaluated in closed form.  The
``certify`` entry point spot-checks the differential inequalities the
analysis establishes, zone by zone, by evaluating the nonlocal operator with
adaptive quadrature on a structured (t, x) sample and reporting the worst
signed residual (negative means satisfied with margin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .kernels import KernelSpec, TRUNCATED, evaluate as kernel_eval, tail_mass

__all__ = [
    "SubsolutionParams",
    "Geometry",
    "CertificationReport",
    "QuadratureError",
    "preset_params",
    "geometry",
    "w_eval",
    "w_slope_at_edge",
    "usub_eval",
    "barrier_v_eval",
    "numeric_nonlocal",
    "certify",
    "threshold_search",
    "ZONES",
]

ZONES = ("blue", "orange", "green", "farfield", "barrier")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""

    def __init__(self, message, achieved, where=None):
        super().__init__(message)
        self.achieved = achieved
        self.where = where


@dataclass(frozen=True)
class SubsolutionParams:
    """Free parameters of the accelerated subsolution.

    ``preset`` marks the coupled choice kappa = (D^{2s}/2) eps/sigma and
    gamma = eps^{2-beta}/(beta-1) with onset time t_eps = sigma/eps; use
    :func:`preset_params` to construct it.  Derived quantities: the convexity
    threshold delta_c and the half-level height factor tau0.
    """

    eps: float
    kappa: float
    gamma: float
    sigma: float
    D_amp: float
    beta: float
    s: float
    preset: bool = False

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1), got %r" % (self.eps,))
        for name in ("kappa", "sigma", "D_amp"):
            v = getattr(self, name)
            if v <= 0:
                raise ValueError("%s must be positive, got %r" % (name, v))
        if self.gamma < 0:
            # gamma = 0 degenerates w to the pure dissipation profile kt/x^{2s}
            raise ValueError("gamma must be nonnegative, got %r" % (self.gamma,))
        if self.beta <= 1.0:
            raise ValueError("subsolution requires beta > 1, got %r" % (self.beta,))
        if self.s <= 0:
            raise ValueError("s must be positive, got %r" % (self.s,))

    @property
    def delta_c(self):
        return 1.0 + 2.0 / min(self.beta, 1.0 + 1.0 / (2.0 * self.s))

    @property
    def tau0(self):
        d2 = 2.0 * self.delta_c
        return (3.0 / d2) * (1.0 - 1.0 / d2 + 1.0 / (3.0 * d2 * d2))

    @property
    def t_eps(self):
        return self.sigma / self.eps


def preset_params(eps, sigma, D_amp, beta, s):
    """Coupled parameter choice tying the diffusion amplitude to tail data."""
    kappa = 0.5 * D_amp ** (2.0 * s) * eps / sigma
    gamma = eps ** (2.0 - beta) / (beta - 1.0)
    return SubsolutionParams(eps, kappa, gamma, sigma, D_amp, beta, s, preset=True)


@dataclass(frozen=True)
class Geometry:
    t: float
    X: float
    X_c: float
    Y: float
    t_eps: float
    delta_c: float
    tau0: float


def _edge(params, t, factor):
    """(kappa t)^{1/2s} [factor * eps^{1-beta} + gamma (beta-1) t]^{1/(2s(beta-1))}."""
    p = params
    bracket = factor * p.eps ** (1.0 - p.beta) + p.gamma * (p.beta - 1.0) * t
    return (p.kappa * t) ** (1.0 / (2.0 * p.s)) * bracket ** (
        1.0 / (2.0 * p.s * (p.beta - 1.0))
    )


def geometry(params, t):
    """Closed-form zone boundaries at time t.

    X is the plateau edge (w = eps there), X_c the convexity onset
    (w = eps/delta_c) and Y the half-level (w = eps/(2 delta_c));
    X < X_c < Y always.
    """
    if params.preset and t < 1.0:
        raise ValueError("preset-mode geometry requires t >= 1, got t=%r" % (t,))
    if t <= 0:
        raise ValueError("t must be positive, got %r" % (t,))
    d = params.delta_c
    return Geometry(
        t=t,
        X=_edge(params, t, 1.0),
        X_c=_edge(params, t, d ** (params.beta - 1.0)),
        Y=_edge(params, t, (2.0 * d) ** (params.beta - 1.0)),
        t_eps=params.t_eps,
        delta_c=d,
        tau0=params.tau0,
    )


def w_eval(params, t, x, with_derivatives=False):
    """The accelerated profile w and, optionally, (w_t, w_x, w_xx).

    w(t, x) = [(kappa t / x^{2s})^{1-beta} - gamma (beta-1) t]^{-1/(beta-1)},
    defined for t >= 1 and x beyond the blow-up locus of the bracket.
    """
    p = params
    if t < 1.0:
        raise ValueError("w is used for t >= 1 only, got t=%r" % (t,))
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("w requires x > 0")
    phi = p.kappa * t / x ** (2.0 * p.s)
    bracket = phi ** (1.0 - p.beta) - p.gamma * (p.beta - 1.0) * t
    if np.any(bracket <= 0):
        raise ValueError(
            "w undefined (x at or below the blow-up locus X_0 at t=%g)" % (t,)
        )
    w = bracket ** (-1.0 / (p.beta - 1.0))
    if not with_derivatives:
        return w if w.ndim else float(w)
    U = w / phi
    phi_t = phi / t
    phi_x = -2.0 * p.s * phi / x
    phi_xx = 2.0 * p.s * (2.0 * p.s + 1.0) * phi / (x * x)
    wb = w**p.beta
    w_t = wb * (p.gamma + phi_t / phi**p.beta)
    w_x = U**p.beta * phi_x
    w_xx = (phi_xx + p.beta * phi_x**2 / phi * (U ** (p.beta - 1.0) - 1.0)) * U**p.beta
    if w.ndim:
        return w, w_t, w_x, w_xx
    return float(w), float(w_t), float(w_x), float(w_xx)


def w_slope_at_edge(params, t):
    """w_x(t, X(t)) in closed form, -2s eps^beta X^{2s(beta-1)-1}/(kappa t)^{beta-1}."""
    p = params
    X = _edge(params, t, 1.0)
    return (
        -2.0
        * p.s
        * p.eps**p.beta
        * X ** (2.0 * p.s * (p.beta - 1.0) - 1.0)
        / (p.kappa * t) ** (p.beta - 1.0)
    )


def usub_eval(params, t, x):
    """Cubic-polished subsolution and derivatives: (u, u_t, u_x, u_xx).

    Equals eps on x <= X(t); beyond, 3(1 - w/eps + w^2/(3 eps^2)) w, which
    glues to the plateau with two continuous x-derivatives.
    """
    p = params
    if params.preset and t < max(1.0, params.t_eps) - 1e-12:
        raise ValueError(
            "preset-mode subsolution is used for t >= max(1, t_eps), got t=%r" % (t,)
        )
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    X = _edge(params, t, 1.0)
    u = np.full(x_arr.shape, p.eps)
    u_t = np.zeros(x_arr.shape)
    u_x = np.zeros(x_arr.shape)
    u_xx = np.zeros(x_arr.shape)
    m = x_arr > X
    if m.any():
        w, w_t, w_x, w_xx = w_eval(params, t, x_arr[m], with_derivatives=True)
        v = w / p.eps
        u[m] = 3.0 * (1.0 - v + v * v / 3.0) * w
        one = 1.0 - v
        u_t[m] = 3.0 * w_t * one**2
        u_x[m] = 3.0 * w_x * one**2
        u_xx[m] = 3.0 * one * (w_xx * one - 2.0 * w_x**2 / p.eps)
    if scalar:
        return float(u[0]), float(u_t[0]), float(u_x[0]), float(u_xx[0])
    return u, u_t, u_x, u_xx


def barrier_v_eval(nu, kappa, s, t, x):
    """Short-time barrier v and v_t.

    v = 1/nu for x <= 0 and kappa t / (x^{2s} + kappa nu t) for x > 0; the
    certification range of validity is t in (0,1), x > R0 + 1 with
    kappa nu <= 1/(2 s J0).
    """
    if t <= 0:
        raise ValueError("barrier requires t > 0, got %r" % (t,))
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    v = np.full(x_arr.shape, 1.0 / nu)
    v_t = np.zeros(x_arr.shape)
    m = x_arr > 0
    xs = x_arr[m] ** (2.0 * s)
    denom = xs + kappa * nu * t
    v[m] = kappa * t / denom
    v_t[m] = kappa * xs / denom**2
    if scalar:
        return float(v[0]), float(v_t[0])
    return v, v_t


def numeric_nonlocal(
    fn,
    spec,
    x,
    truncation_radius,
    limits=None,
    abs_tol=1e-9,
    breakpoints=(),
):
    """Evaluate D[fn](x) by symmetrized adaptive quadrature.

    The principal value is written as
    int_0^R (fn(x+z) + fn(x-z) - 2 fn(x)) J(z) dz; beyond the truncation
    radius the profile is replaced by its limits at +-infinity, so the
    remainder is the exact closed-form tail mass (no estimated cutoff error).

    ``limits`` is (L_minus, L_plus); when omitted the profile is sampled far
    out, which is only adequate for rapidly settling profiles.
    """
    R = float(truncation_radius)
    if R <= 1.0:
        raise ValueError("truncation radius must exceed 1, got %r" % (R,))
    fx = float(fn(x))
    if limits is None:
        limits = (float(fn(x - 8.0 * R)), float(fn(x + 8.0 * R)))
    lminus, lplus = limits

    def integrand(z):
        return (float(fn(x + z)) + float(fn(x - z)) - 2.0 * fx) * float(
            kernel_eval(spec, z)
        )

    z0 = 1.0 if spec.kind == TRUNCATED else 0.0
    pts = sorted({float(p) for p in breakpoints if z0 < p < R})
    total = 0.0
    err = 0.0
    # keep the singular endpoint in its own panel; quad concentrates there
    edges = [z0] + [p for p in pts] + [R]
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        res = quad(
            integrand,
            a,
            b,
            limit=300,
            epsabs=abs_tol / max(1, len(edges)),
            epsrel=1e-11,
            full_output=1,
        )
        total += res[0]
        err += res[1]
        if len(res) > 3:
            raise QuadratureError(
                "quadrature did not converge on [%g, %g]: %s" % (a, b, res[3]),
                achieved=res[1],
                where=(a, b),
            )
    tail = tail_mass(spec, R)
    total += (lplus - fx) * tail + (lminus - fx) * tail
    if err > 50.0 * abs_tol:
        raise QuadratureError(
            "accumulated quadrature error %.2e exceeds target %.2e" % (err, abs_tol),
            achieved=err,
            where=x,
        )
    return total


@dataclass
class CertificationReport:
    """Outcome of one zone certification sweep."""

    zone: str
    count: int
    worst_residual: float
    worst_t: float
    worst_x: float
    passed: bool
    tolerance: float
    samples: list = field(default_factory=list, repr=False)

    def __str__(self):
        return (
            "zone %-8s %-4s  %4d samples  worst residual %+.6e at "
            "(t=%.6g, x=%.6g)  tol %.1e"
            % (
                self.zone,
                "pass" if self.passed else "FAIL",
                self.count,
                self.worst_residual,
                self.worst_t,
                self.worst_x,
                self.tolerance,
            )
        )


def _two_sided_fill(lo, hi, n):
    """Points in (lo, hi) concentrated near both endpoints."""
    if hi <= lo:
        raise ValueError("empty interval (%g, %g)" % (lo, hi))
    half = n // 2
    q1 = np.logspace(-4, -0.31, half)  # near lo
    q2 = 1.0 - np.logspace(-4, -0.31, n - half)  # near hi
    q = np.sort(np.concatenate([q1, q2]))
    return lo + (hi - lo) * q


def _zone_points(params, zone, t, nx):
    g = geometry(params, t)
    bound = 2.0 ** (1.0 / (2.0 * params.s * (params.beta - 1.0))) * g.X
    if zone == "blue":
        # approach X from the left and cover the far plateau
        d = np.logspace(np.log10(0.05), np.log10(2.0 * g.X + 1e3), nx)
        return g.X - d
    if zone == "orange":
        return _two_sided_fill(g.X, g.Y, nx)
    if zone == "green":
        if bound <= g.Y:
            raise ValueError(
                "green zone empty at t=%g (Y=%g >= 2^(1/(2s(beta-1))) X=%g); "
                "increase sigma or t" % (t, g.Y, bound)
            )
        return _two_sided_fill(g.Y, bound, nx)
    if zone == "farfield":
        q = np.logspace(-4, 2, nx)
        return bound * (1.0 + q)
    raise ValueError("unknown zone %r" % (zone,))


def _zone_residual(params, spec, zone, t, xs, quad_tol):
    """Signed residuals of the zone's target inequality (<= 0 means holds)."""
    p = params
    g = geometry(params, t)
    out = np.empty(xs.shape)
    fn = lambda y: usub_eval(params, t, y)[0]
    for i, x in enumerate(xs):
        R = max(1e3, 4.0 * (abs(x) + g.Y))
        breaks = {abs(x - g.X), abs(x - g.Y), abs(x), 1.0, spec.R0}
        D = numeric_nonlocal(
            fn, spec, x, R, limits=(p.eps, 0.0), abs_tol=quad_tol, breakpoints=breaks
        )
        u = usub_eval(params, t, x)[0]
        if zone == "blue":
            out[i] = -(D + 0.5 * p.eps**p.beta * (1.0 - p.eps))
        elif zone in ("orange", "green"):
            out[i] = -(D + 0.5 * (1.0 - p.eps) * u**p.beta)
        else:  # farfield
            rhs = p.eps * (1.0 - p.tau0) / (4.0 * spec.J0 * p.s * x ** (2.0 * p.s))
            out[i] = rhs - D
    return out


def _barrier_residual(nu, kappa, spec, t, xs, quad_tol):
    s = spec.s
    out = np.empty(xs.shape)
    for i, x in enumerate(xs):
        fn = lambda y: barrier_v_eval(nu, kappa, s, t, y)[0]
        R = max(1e3, 8.0 * abs(x))
        v, v_t = barrier_v_eval(nu, kappa, s, t, x)
        D = numeric_nonlocal(
            fn,
            spec,
            x,
            R,
            limits=(1.0 / nu, 0.0),
            abs_tol=quad_tol,
            breakpoints={abs(x), 1.0, spec.R0},
        )
        out[i] = v_t - D - spec.J0 / (2.0 * s) * v
    return out


def certify(
    params,
    zone,
    spec,
    t_samples=32,
    x_samples=64,
    tolerance=1e-6,
    t_values=None,
    t_range=(1.0, 100.0),
    nu=None,
    barrier_kappa=None,
    quad_tol=1e-9,
):
    """Certify one zone's differential inequality on a structured sample.

    Samples are concentrated near zone boundaries where the estimates are
    tight.  Returns a :class:`CertificationReport`; the pass flag is
    worst_residual <= tolerance.  The barrier zone checks the short-time
    inequality v_t - D[v] <= (J0/2s) v and requires ``nu`` and
    ``barrier_kappa`` (the hypothesis kappa*nu <= 1/(2 s J0) is the caller's
    choice; violations show up as positive residuals, which is the point of
    the certificate).
    """
    if zone not in ZONES:
        raise ValueError("unknown zone %r (choose from %r)" % (zone, ZONES))
    samples = []
    if zone == "barrier":
        if nu is None or barrier_kappa is None:
            raise ValueError("barrier zone requires nu and barrier_kappa")
        ts = (np.arange(t_samples) + 0.5) / t_samples  # t in (0, 1)
        xs_all = np.logspace(
            np.log10(spec.R0 + 1.0 + 1e-2), np.log10(100.0 * (spec.R0 + 1.0)), x_samples
        )
        for t in ts:
            res = _barrier_residual(nu, barrier_kappa, spec, t, xs_all, quad_tol)
            samples.extend(zip([t] * len(xs_all), xs_all, res))
    else:
        if t_values is None:
            base = params.t_eps if params.preset else 1.0
            t_values = np.logspace(
                np.log10(base * t_range[0]), np.log10(base * t_range[1]), t_samples
            )
        for t in np.asarray(t_values, dtype=float):
            xs = _zone_points(params, zone, t, x_samples)
            res = _zone_residual(params, spec, zone, t, xs, quad_tol)
            samples.extend(zip([t] * len(xs), xs, res))
    worst = max(samples, key=lambda s_: s_[2])
    return CertificationReport(
        zone=zone,
        count=len(samples),
        worst_residual=float(worst[2]),
        worst_t=float(worst[0]),
        worst_x=float(worst[1]),
        passed=bool(worst[2] <= tolerance),
        tolerance=tolerance,
        samples=samples,
    )


@dataclass
class ThresholdReport:
    """Empirical onset time: first ladder rung where every zone passes.

    This is a measurement on a finite sample; it does not identify the
    analytic threshold time, whose existence the theory guarantees without
    an expression.
    """

    t_first_pass: Optional[float]
    ladder: tuple
    reports: dict


def threshold_search(
    params,
    spec,
    zones=("blue", "orange", "green", "farfield"),
    t_ladder=(1e1, 1e2, 1e3, 1e4, 1e5),
    t_samples=6,
    x_samples=32,
    tolerance=1e-6,
    quad_tol=1e-9,
):
    """Scan an increasing time ladder for the first rung where zones pass."""
    reports = {}
    first = None
    for rung in t_ladder:
        tv = np.logspace(np.log10(rung), np.log10(10.0 * rung), t_samples)
        rung_reports = []
        ok = True
        for z in zones:
            try:
                r = certify(
                    params,
                    z,
                    spec,
                    t_samples=t_samples,
                    x_samples=x_samples,
                    tolerance=tolerance,
                    t_values=tv,
                    quad_tol=quad_tol,
                )
            except ValueError:
                ok = False
                break
            rung_reports.append(r)
            ok = ok and r.passed
        reports[rung] = rung_reports
        if ok and first is None:
            first = rung
            break
    return ThresholdReport(first, tuple(t_ladder), reports)
