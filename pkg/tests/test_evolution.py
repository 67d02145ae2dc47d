import numpy as np
import pytest

from alleefront.discretization import ExteriorDatum, assemble_system, dirichlet_rhs
from alleefront.evolution import (
    GridState,
    ReactionSpec,
    RunSettings,
    StepConfig,
    adapt_domain,
    imex_step,
    initial_grid,
    run,
)


def _grid(u, datum, dx=0.25, left=0.0):
    return GridState(left, dx, np.asarray(u, dtype=float), datum)


def test_extinction_fixed_point():
    n = 50
    datum = ExteriorDatum(0.0, 0.0)
    grid = _grid(np.zeros(n), datum)
    m = assemble_system(0.5, 1.5, 0.25, 0.01, n + 1)
    out = imex_step(grid, m, ReactionSpec(2.0), datum)
    np.testing.assert_allclose(out.values, 0.0, atol=1e-14)
    assert out.time == pytest.approx(0.01)


def test_saturated_fixed_point():
    n = 50
    datum = ExteriorDatum(1.0, 1.0)
    grid = _grid(np.ones(n), datum)
    m = assemble_system(0.5, 1.5, 0.25, 0.01, n + 1)
    out = imex_step(grid, m, ReactionSpec(3.0), datum)
    assert np.max(np.abs(out.values - 1.0)) < 1e-8


def test_step_residual(rng):
    # the computed state satisfies the linear system to near round-off
    n, dx, dt = 80, 0.2, 0.01
    datum = ExteriorDatum(1.0, 0.0)
    u = np.sort(rng.rand(n))[::-1]
    grid = _grid(u, datum, dx=dx)
    reaction = ReactionSpec(2.5)
    m = assemble_system(0.4, 1.4, dx, dt, n + 1)
    out = imex_step(grid, m, reaction, datum)
    rhs = u + dt * reaction(u) + dirichlet_rhs(m, datum)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    res = np.max(np.abs(m.first_row[idx] @ out.values - rhs))
    assert res < 1e-10 * (1.0 + np.max(np.abs(rhs)))


def test_step_validates_matrix_match():
    datum = ExteriorDatum(0.0, 0.0)
    grid = _grid(np.zeros(10), datum)
    m = assemble_system(0.5, 1.5, 0.25, 0.01, 12)  # wrong order
    with pytest.raises(ValueError, match="order"):
        imex_step(grid, m, ReactionSpec(2.0), datum)


def test_adapt_noop_below_threshold():
    cfg = StepConfig(dt=0.01, expand_tol=1e-2, expand_margin=3, max_add=10)
    datum = ExteriorDatum(1.0, 0.0)
    u = np.concatenate([np.ones(5), np.zeros(10)])
    grid = _grid(u, datum)
    out = adapt_domain(grid, cfg)
    assert out is grid


def test_adapt_appends_exactly_max_add_right():
    cfg = StepConfig(dt=0.01, expand_tol=1e-2, expand_margin=3, max_add=150)
    datum = ExteriorDatum(1.0, 0.0)
    u = np.concatenate([np.ones(12), np.full(3, 0.5)])  # sentinel u[-3] above tol
    grid = _grid(u, datum)
    out = adapt_domain(grid, cfg)
    assert out.n == grid.n + 150
    np.testing.assert_allclose(out.values[-150:], 0.0, atol=0)
    assert out.left_x == grid.left_x


def test_adapt_appends_left_fill_one():
    cfg = StepConfig(dt=0.01, expand_tol=1e-2, expand_margin=2, max_add=7)
    datum = ExteriorDatum(1.0, 0.0)
    u = np.concatenate([np.full(2, 0.9), np.zeros(10)])  # 1-u at sentinel = 0.1
    grid = _grid(u, datum, left=5.0)
    out = adapt_domain(grid, cfg)
    assert out.n == grid.n + 7
    np.testing.assert_allclose(out.values[:7], 1.0, atol=0)
    assert out.left_x == pytest.approx(5.0 - 7 * grid.dx)


def test_pure_diffusion_monotone_and_bounded():
    settings = RunSettings(
        s=0.5, beta=2.0, r=0.0, t_end=0.5, dx=0.5, domain=(-30.0, 30.0),
        snapshot_every=0.1, max_add=0,
    )
    traj = run(settings)
    assert traj.status == "completed"
    assert traj.max_bounds_violation <= 1e-12
    assert traj.max_monotone_violation <= 1e-12
    for snap in traj.snapshots:
        d = np.diff(snap.values)
        assert np.sum((d > 1e-8)) == 0  # zero sign changes of the difference


def test_indicator_initial_datum():
    settings = RunSettings(s=0.5, beta=2.0, t_end=1.0, dx=0.5, domain=(-10.0, 10.0))
    grid = initial_grid(settings)
    xs = grid.x()
    np.testing.assert_array_equal(grid.values, np.where(xs <= 0.0, 1.0, 0.0))


def test_smoothed_initial_datum():
    settings = RunSettings(
        s=0.5, beta=2.0, t_end=1.0, dx=0.5, domain=(-10.0, 10.0), initial_smooth=4
    )
    grid = initial_grid(settings)
    u = grid.values
    assert np.all(np.diff(u) <= 0)
    assert u.max() == 1.0 and u.min() == 0.0
    interior_ramp = (u > 0) & (u < 1)
    assert interior_ramp.sum() == 3  # 4-cell ramp has 3 strictly interior nodes


def test_run_records_snapshots_and_levels():
    settings = RunSettings(
        s=0.5, beta=2.0, t_end=2.0, dx=0.5, domain=(-40.0, 40.0),
        snapshot_every=1.0, levels=(0.3, 0.5),
    )
    traj = run(settings)
    times = [s.t for s in traj.snapshots]
    assert times[0] == 0.0
    assert any(abs(t - 1.0) < 1e-9 for t in times)
    assert abs(times[-1] - 2.0) < 1e-9
    t3, x3 = traj.level_series(0.3)
    assert len(t3) == len(traj.level_times)
    # level lines move right once defined
    defined = np.isfinite(x3)
    assert np.all(np.diff(x3[defined]) >= -1e-8)


def test_level_monotone_in_lambda():
    settings = RunSettings(
        s=0.5, beta=2.0, t_end=1.0, dx=0.5, domain=(-40.0, 40.0), levels=(0.2, 0.8)
    )
    traj = run(settings)
    t2, x2 = traj.level_series(0.2)
    t8, x8 = traj.level_series(0.8)
    m = np.isfinite(x2) & np.isfinite(x8)
    assert np.all(x2[m] >= x8[m] - 1e-12)


def test_determinism_bit_identical():
    settings = RunSettings(
        s=0.6, beta=3.0, t_end=1.0, dx=0.5, domain=(-50.0, 50.0),
        expand_tol=1e-3, max_add=20, expand_margin=5,
    )
    a = run(settings)
    b = run(settings)
    assert len(a.snapshots) == len(b.snapshots)
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert sa.t == sb.t
        np.testing.assert_array_equal(sa.values, sb.values)
    for lam in settings.levels:
        np.testing.assert_array_equal(
            np.asarray(a.level_positions[lam]), np.asarray(b.level_positions[lam])
        )


def test_zero_t_end_initial_snapshot_only():
    settings = RunSettings(s=0.5, beta=2.0, t_end=0.0, dx=0.5, domain=(-10.0, 10.0))
    traj = run(settings)
    assert traj.status == "completed"
    assert len(traj.snapshots) == 1
    assert traj.snapshots[0].t == 0.0


def test_domain_growth_reassembles():
    # tiny domain and tight tolerance force growth; matrix sizes must follow
    settings = RunSettings(
        s=0.5, beta=2.0, t_end=0.3, dx=0.5, domain=(-15.0, 15.0),
        expand_tol=1e-6, max_add=12, expand_margin=4,
    )
    traj = run(settings)
    assert traj.status == "completed"
    assert traj.final_grid.n > 59  # initial interior count
    assert traj.max_bounds_violation <= 1e-10


def test_reaction_validation():
    with pytest.raises(ValueError, match="beta"):
        ReactionSpec(0.5)
    with pytest.raises(ValueError, match="nonnegative"):
        ReactionSpec(2.0, r=-1.0)
    f = ReactionSpec(2.0, r=2.0)
    assert f(np.array([0.0, 1.0])) == pytest.approx([0.0, 0.0])
    # clipping keeps tiny negative round-off finite for fractional powers
    assert np.isfinite(ReactionSpec(1.5)(np.array([-1e-15]))).all()
