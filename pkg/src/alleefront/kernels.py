"""Dispersal kernels with algebraic tails.

A kernel is described by a :class:`KernelSpec` carrying the tail exponent
``s`` together with the comparison constants ``J0``, ``J1`` and the onset
radius ``R0`` of the two-sided power-law bounds

    J0^{-1} |z|^{-1-2s} 1_{|z| >= R0}  <=  J(z)  <=  J0 |z|^{-1-2s} 1_{|z| >= 1},

plus the second-moment bound  int_{-1}^{1} J(z) z^2 dz <= 2 J1.  The upper
bound is read as constraining J only on ``|z| >= 1``; inside the unit
interval only the second-moment bound applies (a singular kernel is allowed
there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma

__all__ = [
    "KernelSpec",
    "fractional_kernel",
    "truncated_algebraic_kernel",
    "composite_kernel",
    "fractional_normalization",
    "evaluate",
    "tail_mass",
    "second_moment",
    "validate_spec",
    "ValidationReport",
    "ClauseResult",
]

FRACTIONAL = "fractional"
TRUNCATED = "truncated-algebraic"
COMPOSITE = "composite"


def fractional_normalization(s):
    """Constant making the integral operator's Fourier symbol equal |xi|^{2s}.

    Classical closed form 4^s Gamma(1/2 + s) / (sqrt(pi) |Gamma(-s)|) in one
    dimension.  Cross-validated numerically by the spectral oracle in the
    diagnostics module.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("fractional exponent must lie in (0, 1), got s=%r" % (s,))
    return 4.0**s * _gamma(0.5 + s) / (math.sqrt(math.pi) * abs(_gamma(-s)))


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a dispersal kernel.

    ``profile`` is only consulted for the composite kind; the built-in kinds
    evaluate their closed forms.
    """

    kind: str
    s: float
    J0: float
    J1: float
    R0: float = 1.0
    norm_const: float = 1.0
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )
    radii: tuple = ()  # quadrature hints: radii where the profile has kinks

    def __post_init__(self):
        if self.kind not in (FRACTIONAL, TRUNCATED, COMPOSITE):
            raise ValueError("unknown kernel kind %r" % (self.kind,))
        if self.s <= 0:
            raise ValueError("tail exponent must be positive, got s=%r" % (self.s,))
        if self.kind == FRACTIONAL and not self.s < 1.0:
            raise ValueError(
                "fractional kind requires s in (0, 1); got s=%r "
                "(use the truncated-algebraic kind for s >= 1)" % (self.s,)
            )
        if self.J0 <= 0:
            raise ValueError("J0 must be positive, got %r" % (self.J0,))
        if self.J1 < 0:
            raise ValueError("J1 must be nonnegative, got %r" % (self.J1,))
        if self.R0 < 1:
            raise ValueError("R0 must be >= 1, got %r" % (self.R0,))
        if self.kind == COMPOSITE and self.profile is None:
            raise ValueError("composite kind requires a profile callable")


def fractional_kernel(s, norm_const=None, J0=None, J1=None, R0=1.0):
    """Kernel norm_const * |z|^{-1-2s}, the fractional Laplacian generator.

    With the default ``norm_const`` the induced operator has Fourier symbol
    -|xi|^{2s}.  Comparison constants default to the tightest admissible
    values for this closed form.
    """
    if norm_const is None:
        norm_const = fractional_normalization(s)
    if J0 is None:
        J0 = max(norm_const, 1.0 / norm_const)
    if J1 is None:
        J1 = norm_const / (2.0 * (1.0 - s))
    return KernelSpec(FRACTIONAL, s, J0, J1, R0, norm_const)


def truncated_algebraic_kernel(s, J0=1.0, J1=0.0, R0=1.0):
    """Integrable kernel |z|^{-1-2s} 1_{|z| >= 1}; admits any s > 0."""
    return KernelSpec(TRUNCATED, s, J0, J1, R0, 1.0)


def composite_kernel(profile, s, J0, J1, R0=1.0, radii=()):
    """Kernel given by an arbitrary even profile; bounds are the user's claim.

    The claim is checked numerically by :func:`validate_spec`, never assumed.
    ``radii`` lists radii where the profile is non-smooth (cutoffs, bumps) so
    quadratures can split panels there.
    """
    return KernelSpec(COMPOSITE, s, J0, J1, R0, 1.0, profile, tuple(radii))


def evaluate(spec, z):
    """Kernel density J(z).  z = 0 is rejected (singular point)."""
    z = np.asarray(z, dtype=float)
    if np.any(z == 0.0):
        raise ValueError("kernel evaluated at z = 0 (singular point)")
    az = np.abs(z)
    if spec.kind == FRACTIONAL:
        out = spec.norm_const * az ** (-1.0 - 2.0 * spec.s)
    elif spec.kind == TRUNCATED:
        out = np.where(az >= 1.0, az ** (-1.0 - 2.0 * spec.s), 0.0)
    else:
        out = np.asarray(spec.profile(az), dtype=float)
    if out.ndim == 0:
        return float(out)
    return out


def tail_mass(spec, B):
    """One-sided tail integral  int_B^inf J(z) dz  for B >= 1.

    Closed form for the power-law kinds, adaptive quadrature plus the
    analytic power-law remainder for the composite kind.
    """
    if B < 1.0:
        raise ValueError("tail bounds only hold for B >= 1, got B=%r" % (B,))
    s = spec.s
    if spec.kind == FRACTIONAL:
        return spec.norm_const / (2.0 * s * B ** (2.0 * s))
    if spec.kind == TRUNCATED:
        return 1.0 / (2.0 * s * B ** (2.0 * s))
    # composite: split at declared radii, then integrate the decaying tail on
    # the half-line (scipy maps it to a finite interval)
    f = lambda z: float(spec.profile(np.asarray(abs(z))))
    split = max([B, spec.R0] + [r for r in spec.radii if r > B]) + 10.0
    pts = sorted({r for r in tuple(spec.radii) + (spec.R0,) if B < r < split})
    val, _ = quad(f, B, split, points=pts, limit=400, epsabs=1e-13, epsrel=1e-11)
    tail, _ = quad(f, split, np.inf, limit=400, epsabs=1e-13, epsrel=1e-11)
    return val + tail


def second_moment(spec):
    """int_{-1}^{1} J(z) z^2 dz (exact for the built-in kinds)."""
    s = spec.s
    if spec.kind == FRACTIONAL:
        return spec.norm_const / (1.0 - s)
    if spec.kind == TRUNCATED:
        return 0.0
    val, _ = quad(
        lambda z: float(spec.profile(np.asarray(abs(z)))) * z * z,
        0.0,
        1.0,
        limit=400,
        epsabs=1e-13,
        epsrel=1e-11,
    )
    return 2.0 * val


@dataclass
class ClauseResult:
    name: str
    passed: bool
    worst_margin: float
    worst_z: float


@dataclass
class ValidationReport:
    spec: KernelSpec
    clauses: list

    @property
    def passed(self):
        return all(c.passed for c in self.clauses)

    def clause(self, name):
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        lines = ["kernel validation (%s, s=%g):" % (self.spec.kind, self.spec.s)]
        for c in self.clauses:
            lines.append(
                "  %-14s %-4s worst margin %+.3e at |z|=%.4g"
                % (c.name, "pass" if c.passed else "FAIL", c.worst_margin, c.worst_z)
            )
        return "\n".join(lines)


# 200 log-spaced points per decade over |z| in [1e-3, 1e4]; cheap and covers
# both the singularity and the far tail
_VAL_TOL = 1e-9


def _sample_radii():
    return np.logspace(-3.0, 4.0, 7 * 200 + 1)


def validate_spec(spec, rtol=_VAL_TOL):
    """Numerically check the hypothesis clauses on a log-spaced sample.

    Returns a :class:`ValidationReport`; failures are carried in the report,
    never raised.
    """
    z = _sample_radii()
    jz = np.asarray(evaluate(spec, z), dtype=float)
    jmz = np.asarray(evaluate(spec, -z), dtype=float)
    clauses = []

    # evenness
    de = np.abs(jz - jmz) / np.maximum(1.0, np.abs(jz))
    i = int(np.argmax(de))
    clauses.append(ClauseResult("even", bool(de[i] <= rtol), float(de[i]), float(z[i])))

    # nonnegativity
    i = int(np.argmin(jz))
    clauses.append(
        ClauseResult("nonnegative", bool(jz[i] >= -rtol), float(-jz[i]), float(z[i]))
    )

    # upper bound on |z| >= 1
    m = z >= 1.0
    bound = spec.J0 * z[m] ** (-1.0 - 2.0 * spec.s)
    rel = jz[m] / bound - 1.0
    i = int(np.argmax(rel))
    clauses.append(
        ClauseResult("upper-bound", bool(rel[i] <= rtol), float(rel[i]), float(z[m][i]))
    )

    # lower bound on |z| >= R0
    m = z >= spec.R0
    bound = z[m] ** (-1.0 - 2.0 * spec.s) / spec.J0
    rel = 1.0 - jz[m] / bound
    i = int(np.argmax(rel))
    clauses.append(
        ClauseResult("lower-bound", bool(rel[i] <= rtol), float(rel[i]), float(z[m][i]))
    )

    # second moment
    mom = second_moment(spec)
    margin = mom - 2.0 * spec.J1
    clauses.append(
        ClauseResult("second-moment", bool(margin <= rtol), float(margin), 1.0)
    )

    return ValidationReport(spec, clauses)
