"""Acceptance suite: one test per primary criterion, tolerances pinned.

Each test prints a single PASS/FAIL line (visible with pytest -s or in the
captured output).  The long-running fronts are shared module fixtures; the
choices not pinned by a criterion (grid step for the dichotomy, domain for
the short-time tail) are stated next to each fixture.
"""

import os

import numpy as np
import pytest

from alleefront.config import parse_config
from alleefront.diagnostics import (
    LevelSeries,
    exponent_fit,
    flattening_series,
    regime_classify,
    symbol_error,
    tail_fit,
)
from alleefront.evolution import RunSettings, run
from alleefront.kernels import fractional_kernel, truncated_algebraic_kernel
from alleefront.runner import simulate_cmd
from alleefront.subsolution import (
    certify,
    geometry,
    preset_params,
    usub_eval,
    w_eval,
    w_slope_at_edge,
)
from alleefront.toeplitz import dense_solve, levinson_solve
from conftest import random_dd_system


def _report(name, ok, detail):
    print("[ACCEPTANCE] %-28s %s  (%s)" % (name, "PASS" if ok else "FAIL", detail))
    assert ok, "%s: %s" % (name, detail)


# ----------------------------------------------------------------- fixtures

@pytest.fixture(scope="module")
def accel_run():
    # criterion text pins beta=3, s=0.5, defaults scaled to dx=0.5, t_end=100
    settings = RunSettings(s=0.5, beta=3.0, t_end=100.0, dx=0.5)
    return run(settings)


@pytest.fixture(scope="module")
def dichotomy_runs():
    # criterion pins beta=3, t_end=60 and the two s values; dx=0.5 is our
    # choice (not pinned) to keep the run in the minutes range
    out = {}
    for s in (0.8, 0.6):
        out[s] = run(RunSettings(s=s, beta=3.0, t_end=60.0, dx=0.5))
    return out


@pytest.fixture(scope="module")
def short_time_run():
    # criterion pins beta=1.5, s=0.5, t = 1 and the value window; the domain
    # is enlarged (to +-4000, static) so the 1e-4 level is resolved at t=1
    # without relying on freshly appended points
    settings = RunSettings(
        s=0.5, beta=1.5, t_end=1.0, dx=0.4, domain=(-4000.0, 4000.0),
        snapshot_every=1.0, level_every=10,
    )
    return run(settings)


@pytest.fixture(scope="module")
def flattening_run():
    # criterion pins beta=1.5, s=0.5, t_end=20; dx and the domain are ours.
    # The domain is widened to +-3000 (static) so the moving value window
    # u in (1e-5, 1e-2) keeps interior hinterland through t = 20: on +-1000
    # the 1%-level reaches the Dirichlet boundary layer near t ~ 16 and the
    # fitted amplitude is dragged down by the truncated tail
    settings = RunSettings(
        s=0.5, beta=1.5, t_end=20.0, dx=0.6, domain=(-3000.0, 3000.0),
        snapshot_every=1.0, level_every=10,
    )
    return run(settings)


def _all_runs(accel_run, dichotomy_runs, short_time_run, flattening_run):
    return {
        "accel": accel_run,
        "s0.8": dichotomy_runs[0.8],
        "s0.6": dichotomy_runs[0.6],
        "tail": short_time_run,
        "flattening": flattening_run,
    }


# ---------------------------------------------------------------- criteria

def test_acceleration_exponent(accel_run):
    t, x = accel_run.level_series(0.5)
    fit = exponent_fit(LevelSeries(0.5, t, x), (30.0, 100.0))
    ok = 1.35 <= fit.slope <= 1.65
    _report(
        "acceleration exponent",
        ok,
        "slope %.4f on [30,100], target 1.5 +- 0.15" % fit.slope,
    )


def test_front_acceleration_dichotomy(dichotomy_runs):
    t8, x8 = dichotomy_runs[0.8].level_series(0.5)
    m = (t8 >= 30.0) & (t8 <= 60.0) & np.isfinite(x8)
    speed = x8[m] / t8[m]
    variation = (speed.max() - speed.min()) / speed.mean()
    ok_front = variation < 0.15

    t6, x6 = dichotomy_runs[0.6].level_series(0.5)
    fit = exponent_fit(LevelSeries(0.5, t6, x6), (30.0, 60.0))
    ok_accel = fit.slope > 1.1

    rep8 = regime_classify(0.8, 3.0)
    rep6 = regime_classify(0.6, 3.0)
    ok_class = rep8.regime == "linear-front" and rep6.regime == "accelerating"

    _report(
        "front/acceleration dichotomy",
        ok_front and ok_accel and ok_class,
        "s=0.8 speed variation %.3f (<0.15), s=0.6 slope %.3f (>1.1), "
        "classifier %s/%s" % (variation, fit.slope, rep8.regime, rep6.regime),
    )


def test_short_time_tail(short_time_run):
    snap = [s for s in short_time_run.snapshots if abs(s.t - 1.0) < 1e-9][0]
    _, free = tail_fit(snap, 0.5, (1e-4, 1e-2))
    target = -2.0 * 0.5
    ok = abs(free.exponent - target) <= 0.1 * abs(target)
    _report(
        "short-time tail exponent",
        ok,
        "free exponent %.4f vs -2s = %.1f (10%% band), %d points"
        % (free.exponent, target, free.count),
    )


def test_flattening_linear_growth(flattening_run):
    snaps = [s for s in flattening_run.snapshots if s.t >= 1.0]
    flat = flattening_series(snaps, 0.5, (1e-5, 1e-2))
    after = flat.t > 2.0
    increasing = bool(np.all(np.diff(flat.C[after]) > 0))
    ok = increasing and flat.max_rel_deviation < 0.20
    _report(
        "flattening linear growth",
        ok,
        "C(t) increasing after t=2: %s, late-window deviation %.3f (<0.20)"
        % (increasing, flat.max_rel_deviation),
    )


def test_discretization_oracle():
    details = []
    ok = True
    for s in (0.3, 0.5, 0.7):
        spec = fractional_kernel(s)
        gamma = 1.0 + s
        err = symbol_error(spec, gamma, 1.0, 0.05, 200.0)
        err2 = symbol_error(spec, gamma, 1.0, 0.025, 200.0)
        order = np.log2(err / err2)
        details.append("s=%.1f err %.2e order %.2f" % (s, err, order))
        ok = ok and err < 0.05 and order >= 1.5
    _report("discretization oracle", ok, "; ".join(details))


def test_solver_oracle(rng):
    worst = 0.0
    for _ in range(100):
        n = int(rng.randint(2, 513))
        row, rhs = random_dd_system(rng, n)
        x = levinson_solve(row, rhs)
        xd = dense_solve(row, rhs)
        worst = max(worst, np.max(np.abs(x - xd)) / np.max(np.abs(xd)))
    x3 = levinson_solve(np.array([2.0, 1.0, 0.0]), np.array([1.0, 1.0, 1.0]))
    ok3 = np.allclose(x3, [0.5, 0.0, 0.5], atol=1e-12)
    ok = worst <= 1e-8 and ok3
    _report(
        "solver oracle",
        ok,
        "worst relative error %.2e over 100 systems n<=512; 3x3 -> %s"
        % (worst, np.round(x3, 12)),
    )


def test_subsolution_certificates(rng):
    details = []
    ok = True

    # Lemma-2.1-type barrier: 20x20 sample with kappa*nu at the bound
    spec = fractional_kernel(0.5)
    nu = 4.0
    bk = 1.0 / (2.0 * spec.s * spec.J0 * nu)
    rep = certify(
        None, "barrier", spec, t_samples=20, x_samples=20, nu=nu, barrier_kappa=bk
    )
    ok = ok and rep.passed and rep.worst_residual <= 1e-6
    details.append("barrier worst %.2e" % rep.worst_residual)

    # blue and farfield zones under the preset coupling, s >= 1 path
    ker = truncated_algebraic_kernel(1.0)
    p = preset_params(eps=1e-3, sigma=1000.0, D_amp=1.0, beta=1.2, s=1.0)
    for zone in ("blue", "farfield"):
        rep = certify(p, zone, ker, t_samples=16, x_samples=32)
        ok = ok and rep.passed
        details.append("%s worst %.2e" % (zone, rep.worst_residual))

    # analytic derivatives against finite differences at 1e-6 (5-point
    # stencil for the second derivative: the 3-point one bottoms out near
    # 1e-5 relative from float cancellation at these scales)
    pd = preset_params(eps=0.05, sigma=10.0, D_amp=1.0, beta=1.4, s=0.7)
    deriv_ok = True
    for _ in range(60):
        t = float(pd.t_eps * rng.uniform(1.0, 40.0))
        g = geometry(pd, t)
        x = float(g.X * rng.uniform(1.01, 4.0))
        w, w_t, w_x, w_xx = w_eval(pd, t, x, with_derivatives=True)
        ht, hx, h2 = 1e-5 * t, 1e-5 * x, 1e-3 * x
        fd_t = (w_eval(pd, t + ht, x) - w_eval(pd, t - ht, x)) / (2 * ht)
        fd_x = (w_eval(pd, t, x + hx) - w_eval(pd, t, x - hx)) / (2 * hx)
        fd_xx = (
            -w_eval(pd, t, x + 2 * h2)
            + 16 * w_eval(pd, t, x + h2)
            - 30 * w
            + 16 * w_eval(pd, t, x - h2)
            - w_eval(pd, t, x - 2 * h2)
        ) / (12 * h2 * h2)
        deriv_ok = (
            deriv_ok
            and abs(fd_t - w_t) <= 1e-6 * abs(w_t)
            and abs(fd_x - w_x) <= 1e-6 * abs(w_x)
            and abs(fd_xx - w_xx) <= 1e-6 * abs(w_xx)
        )
    ok = ok and deriv_ok
    details.append("derivatives FD@1e-6 %s" % deriv_ok)

    # C2 gluing at the plateau edge: one-sided difference quotients from the
    # right converge to the plateau values (eps, 0, 0) within 1e-6
    t = pd.t_eps * 2.0
    g = geometry(pd, t)
    h = 1e-5 * g.X
    u0 = usub_eval(pd, t, g.X + 1e-12 * g.X)[0]
    u1 = usub_eval(pd, t, g.X + h)[0]
    u2 = usub_eval(pd, t, g.X + 2 * h)[0]
    glue_ok = (
        abs(u0 - pd.eps) <= 1e-9 * pd.eps
        and abs((u1 - pd.eps) / h) <= 1e-6  # one-sided du/dx at the seam
        and abs((u2 - 2 * u1 + pd.eps) / h**2) <= 1e-6  # one-sided d2u/dx2
    )
    # the analytic derivatives vanish continuously as the seam is approached
    for hh in (1e-3, 1e-5, 1e-7):
        _, _, u_x, u_xx = usub_eval(pd, t, g.X * (1 + hh))
        glue_ok = glue_ok and abs(u_x) <= 1e-2 * hh and abs(u_xx) <= 1.0 * hh
    ok = ok and glue_ok
    details.append("C2 gluing %s" % glue_ok)

    # asymptotic decay toward zero along a log time ladder
    ts = np.logspace(np.log10(p.t_eps), np.log10(100 * p.t_eps), 21)
    Xs = np.array([geometry(p, t).X for t in ts])
    slope = np.array([abs(w_slope_at_edge(p, t)) for t in ts])
    asym_ok = (
        np.all(np.diff(ts / Xs) < 0)
        and np.all(np.diff(p.kappa * ts / Xs ** (2 * p.s)) < 0)
        and np.all(np.diff(ts * np.log(ts) / Xs) < 0)
        and np.all(np.diff(slope) < 0)
    )
    ok = ok and asym_ok
    details.append("asymptotics decreasing %s" % asym_ok)

    _report("subsolution certificates", ok, "; ".join(details))


def test_structural_invariants(
    accel_run, dichotomy_runs, short_time_run, flattening_run, tmp_path
):
    runs = _all_runs(accel_run, dichotomy_runs, short_time_run, flattening_run)
    details = []
    ok = True
    for name, traj in runs.items():
        bounds_ok = traj.max_bounds_violation <= 1e-8
        mono_ok = traj.max_monotone_violation <= 1e-8
        level_ok = True
        for lam in traj.level_positions:
            _, x = traj.level_series(lam)
            xs = x[np.isfinite(x)]
            if xs.size > 1:
                level_ok = level_ok and bool(np.all(np.diff(xs) >= -1e-8))
        ok = ok and bounds_ok and mono_ok and level_ok
        details.append(
            "%s bounds %.1e mono %.1e levels %s"
            % (name, traj.max_bounds_violation, traj.max_monotone_violation, level_ok)
        )

    # byte-identical reruns, checked through the full persistence pipeline on
    # a short front with domain growth enabled
    text = (
        "kernel.s = 0.5\nrun.beta = 3\nrun.t_end = 5\nrun.dx = 0.5\n"
        "run.domain = -60,60\nrun.expand_tol = 1e-3\nrun.max_add = 20\n"
        "diagnostics.tail_window = 1e-6,0.5\ndiagnostics.flatten_window = 1e-6,0.5\n"
    )
    cfg = parse_config(text, env={})
    out1, out2 = str(tmp_path / "rerun_a"), str(tmp_path / "rerun_b")
    simulate_cmd(cfg, out1)
    simulate_cmd(cfg, out2)
    identical = True
    import json

    files = json.load(open(os.path.join(out1, "manifest.json")))["files"]
    for fname in files:
        if fname == "manifest.json":
            continue
        with open(os.path.join(out1, fname), "rb") as fa, open(
            os.path.join(out2, fname), "rb"
        ) as fb:
            if fa.read() != fb.read():
                identical = False
                details.append("MISMATCH %s" % fname)
    ok = ok and identical
    details.append("byte-identical rerun %s" % identical)

    _report("structural invariants", ok, "; ".join(details))
