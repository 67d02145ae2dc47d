"""Time integration: IMEX(1,1,1) stepping and the adaptive expanding domain.

Diffusion is treated implicitly (backward Euler, one symmetric-Toeplitz solve
per step via the Levinson recursion), the reaction explicitly (forward
Euler).  The domain is enlarged by a fixed block of points on a side whenever
the solution at a sentinel node near that edge moves away from the exterior
value by more than a tolerance; appended nodes are filled with the exterior
value and the stepping matrix is re-assembled from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .discretization import (
    ExteriorDatum,
    OperatorMatrix,
    assemble_system,
    dirichlet_rhs,
)
from .toeplitz import LevinsonBreakdown, levinson_solve

__all__ = [
    "GridState",
    "ReactionSpec",
    "StepConfig",
    "RunSettings",
    "Snapshot",
    "Trajectory",
    "imex_step",
    "adapt_domain",
    "initial_grid",
    "run",
]

BOUND_SLACK = 1e-12  # floating slack on the [0, 1] range before flagging


@dataclass
class GridState:
    """Interior solution values on a uniform grid plus exterior data.

    ``left_x`` is the coordinate of the first interior node; the two closure
    points sit one spacing outside and carry the exterior values.
    """

    left_x: float
    dx: float
    values: np.ndarray
    exterior: ExteriorDatum
    time: float = 0.0

    @property
    def n(self):
        return self.values.shape[0]

    def x(self):
        """Coordinates of the interior nodes."""
        return self.left_x + self.dx * np.arange(self.n)

    @property
    def extent(self):
        """Length of the open interval, (n + 1) * dx."""
        return (self.n + 1) * self.dx

    def bounds_violation(self):
        """How far values stray outside [0, 1] (0.0 when inside)."""
        u = self.values
        return max(0.0, float(-u.min()), float(u.max() - 1.0))

    def monotone_violation(self):
        """Largest positive forward difference (0.0 for nonincreasing data)."""
        d = np.diff(self.values)
        return max(0.0, float(d.max())) if d.size else 0.0


@dataclass(frozen=True)
class ReactionSpec:
    """Monostable reaction f(u) = r u^beta (1 - u); beta = 1 is plain KPP.

    r = 0 is allowed as the pure-diffusion degenerate case.
    """

    beta: float
    r: float = 1.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("growth rate must be nonnegative, got r=%r" % (self.r,))
        if self.beta < 1.0:
            raise ValueError("Allee exponent must be >= 1, got beta=%r" % (self.beta,))

    def __call__(self, u):
        # clamp before the (possibly non-integer) power so round-off below 0
        # cannot produce NaN
        uc = np.clip(u, 0.0, 1.0)
        return self.r * uc**self.beta * (1.0 - uc)


@dataclass(frozen=True)
class StepConfig:
    """Time step plus domain-adaptation parameters."""

    dt: float
    expand_tol: float = 1e-2
    expand_margin: int = 10
    max_add: int = 150

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive, got %r" % (self.dt,))
        if not 0.0 < self.expand_tol < 1.0:
            raise ValueError("expand_tol must lie in (0, 1), got %r" % (self.expand_tol,))
        if self.max_add < 0:
            raise ValueError("max_add must be >= 0, got %r" % (self.max_add,))
        if self.expand_margin < 1:
            raise ValueError("expand_margin must be >= 1, got %r" % (self.expand_margin,))


def imex_step(grid, matrix, reaction, datum, rhs_exterior=None):
    """One forward-backward Euler step; returns the state at time + dt.

    Solves (I + dt A) u_next = u + dt f(u) + dt g where g folds in the
    Dirichlet data.  ``rhs_exterior`` may carry a precomputed
    :func:`dirichlet_rhs` for the (matrix, datum) pair.
    """
    u = grid.values
    if matrix.order != u.shape[0]:
        raise ValueError(
            "matrix order %d does not match grid interior count %d"
            % (matrix.order, u.shape[0])
        )
    if matrix.dx != grid.dx:
        raise ValueError("matrix assembled with dx=%g, grid has dx=%g" % (matrix.dx, grid.dx))
    if rhs_exterior is None:
        rhs_exterior = dirichlet_rhs(matrix, datum)
    rhs = u + matrix.dt * reaction(u) + rhs_exterior
    unew = levinson_solve(matrix.first_row, rhs)
    return GridState(grid.left_x, grid.dx, unew, datum, grid.time + matrix.dt)


def adapt_domain(grid, cfg):
    """Grow the grid when a sentinel node deviates from the exterior value.

    Right side: trigger when u at the sentinel (``expand_margin`` points in
    from the right edge) exceeds ``expand_tol``; append ``max_add`` points
    filled with the right exterior value.  Left side: mirror test on 1 - u
    with the left fill value.  The spacing never changes.
    """
    u = grid.values
    n = u.shape[0]
    m = cfg.expand_margin
    if cfg.max_add == 0 or n <= m:
        return grid
    new = u
    left_x = grid.left_x
    if u[-m] > cfg.expand_tol:
        new = np.concatenate([new, np.full(cfg.max_add, grid.exterior.right_value)])
    if 1.0 - u[m - 1] > cfg.expand_tol:
        new = np.concatenate([np.full(cfg.max_add, grid.exterior.left_value), new])
        left_x = left_x - cfg.max_add * grid.dx
    if new is u:
        return grid
    return GridState(left_x, grid.dx, new, grid.exterior, grid.time)


@dataclass(frozen=True)
class RunSettings:
    """Everything a single simulation needs, resolved to concrete values."""

    s: float
    beta: float
    t_end: float
    r: float = 1.0
    dt: float = 0.01
    dx: float = 0.2
    domain: tuple = (-1000.0, 1000.0)
    split_gamma: Optional[float] = None  # defaults to 1 + s
    expand_tol: float = 1e-2
    expand_margin: int = 10
    max_add: int = 150
    levels: tuple = (0.5,)
    snapshot_every: float = 1.0
    level_every: int = 1
    initial_height: float = 1.0
    initial_edge: float = 0.0
    initial_smooth: int = 0  # ramp width in grid cells; 0 = exact indicator

    def gamma(self):
        return 1.0 + self.s if self.split_gamma is None else self.split_gamma


@dataclass
class Snapshot:
    t: float
    left_x: float
    dx: float
    values: np.ndarray

    def x(self):
        return self.left_x + self.dx * np.arange(self.values.shape[0])


@dataclass
class Trajectory:
    """Recorded output of one run: snapshots, level series, and monitors."""

    settings: RunSettings
    snapshots: list = field(default_factory=list)
    level_times: list = field(default_factory=list)
    level_positions: dict = field(default_factory=dict)
    status: str = "completed"
    abort_reason: str = ""
    abort_time: float = np.nan
    max_bounds_violation: float = 0.0
    max_monotone_violation: float = 0.0
    final_grid: Optional[GridState] = None

    def level_series(self, lam):
        """(t, x) arrays for one tracked level, NaN where undefined."""
        t = np.asarray(self.level_times)
        x = np.asarray(self.level_positions[lam])
        return t, x


def initial_grid(settings):
    """Indicator datum a*1_{x <= b} sampled on the grid, optionally ramped."""
    a, b = settings.domain
    if b <= a:
        raise ValueError("empty domain %r" % (settings.domain,))
    M = int(round((b - a) / settings.dx))
    if abs(a + M * settings.dx - b) > 1e-9 * max(1.0, abs(b)):
        raise ValueError(
            "domain length %g is not a multiple of dx=%g" % (b - a, settings.dx)
        )
    if M < 4:
        raise ValueError("domain too small for the stencil (M=%d)" % M)
    xs = a + settings.dx * np.arange(1, M)
    height = settings.initial_height
    edge = settings.initial_edge
    if settings.initial_smooth > 0:
        width = settings.initial_smooth * settings.dx
        u = height * np.clip(1.0 - (xs - edge) / width, 0.0, 1.0)
    else:
        u = np.where(xs <= edge, height, 0.0)
    datum = ExteriorDatum(left_value=height, right_value=0.0)
    return GridState(a + settings.dx, settings.dx, u, datum, 0.0)


def _near_multiple(t, every):
    if every <= 0:
        return False
    q = t / every
    return abs(q - round(q)) < 1e-9


def _record_levels(traj, grid, levels):
    from .diagnostics import level_position

    traj.level_times.append(grid.time)
    for lam in levels:
        pos, flag = level_position(grid, lam)
        traj.level_positions.setdefault(lam, []).append(
            pos if flag == "ok" else np.nan
        )


def run(settings):
    """Run a full simulation; deterministic given identical settings.

    Snapshots are recorded at t = 0, every ``snapshot_every`` time units,
    at t = 1 (always, when reached) and at t_end.  Level positions are
    recorded every ``level_every`` steps.  A Levinson breakdown aborts the
    run; the trajectory then carries status "aborted" and the abort time.
    """
    grid = initial_grid(settings)
    reaction = ReactionSpec(settings.beta, settings.r)
    cfg = StepConfig(
        dt=settings.dt,
        expand_tol=settings.expand_tol,
        expand_margin=settings.expand_margin,
        max_add=settings.max_add,
    )
    traj = Trajectory(settings=settings)
    for lam in settings.levels:
        traj.level_positions[lam] = []

    def snap(g):
        traj.snapshots.append(Snapshot(g.time, g.left_x, g.dx, g.values.copy()))

    def monitor(g):
        traj.max_bounds_violation = max(traj.max_bounds_violation, g.bounds_violation())
        traj.max_monotone_violation = max(
            traj.max_monotone_violation, g.monotone_violation()
        )

    snap(grid)
    monitor(grid)
    _record_levels(traj, grid, settings.levels)

    matrix = assemble_system(
        settings.s, settings.gamma(), settings.dx, settings.dt, grid.n + 1
    )
    g_ext = dirichlet_rhs(matrix, grid.exterior)

    nsteps = int(round(settings.t_end / settings.dt))
    recorded_one = settings.t_end < 1.0 - 1e-12
    for it in range(1, nsteps + 1):
        grown = adapt_domain(grid, cfg)
        if grown.n != grid.n:
            grid = grown
            matrix = assemble_system(
                settings.s, settings.gamma(), settings.dx, settings.dt, grid.n + 1
            )
            g_ext = dirichlet_rhs(matrix, grid.exterior)
        try:
            grid = imex_step(grid, matrix, reaction, grid.exterior, rhs_exterior=g_ext)
        except LevinsonBreakdown as exc:
            traj.status = "aborted"
            traj.abort_reason = str(exc)
            traj.abort_time = grid.time
            break
        grid.time = it * settings.dt  # avoid accumulation drift
        monitor(grid)
        if it % settings.level_every == 0 or it == nsteps:
            _record_levels(traj, grid, settings.levels)
        take = _near_multiple(grid.time, settings.snapshot_every) or it == nsteps
        if not recorded_one and abs(grid.time - 1.0) < 1e-9:
            take = True
            recorded_one = True
        if take:
            snap(grid)
    traj.final_grid = grid
    return traj
