"""Subcommand implementations: simulate / certify / analyze plus persistence.

Every command writes into an output directory containing exactly one
``manifest.json`` listing the emitted data files.  Data files carry no
timestamps, so identical configurations reproduce them byte for byte; wall
times and provenance live only in the manifest.  CSV convention: comma
separator, one header line, floats at 17 significant digits (exact float64
round-trip).
"""

from __future__ import annotations

import json
import os
import time

import numpy as np

from . import __version__
from .config import ConfigError, parse_config, require, serialize_config
from .diagnostics import (
    LevelSeries,
    exponent_fit,
    regime_classify,
    tail_fit,
)
from .evolution import RunSettings, run
from .kernels import KernelSpec, fractional_kernel, truncated_algebraic_kernel
from .subsolution import (
    QuadratureError,
    SubsolutionParams,
    ZONES,
    certify,
    preset_params,
)

__all__ = ["simulate_cmd", "certify_cmd", "analyze_cmd", "CommandError"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_CERTIFY = 3


class CommandError(RuntimeError):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(x):
    return "%.17g" % x


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")


def _read_csv(path, ncols=None):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CommandError("file %s: empty CSV" % path, EXIT_USAGE)
    header = lines[0].split(",")
    want = ncols if ncols is not None else len(header)
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != want:
            raise CommandError(
                "file %s, line %d: expected %d columns, got %d"
                % (path, ln, want, len(parts)),
                EXIT_USAGE,
            )
        rows.append(parts)
    return header, rows


def _floats(path, ln, parts):
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise CommandError("file %s, line %d: malformed number" % (path, ln), EXIT_USAGE)


class _Manifest:
    def __init__(self, out_dir, command, cfg):
        self.out_dir = out_dir
        self.data = {
            "code_version": __version__,
            "command": command,
            "status": "running",
            "abort_reason": None,
            "abort_time": None,
            "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "ended_utc": None,
            "config_file": "resolved.cfg",
            "files": [],
            "notes": [],
        }
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "resolved.cfg"), "w", encoding="utf-8") as fh:
            fh.write(serialize_config(cfg))
        self.add("resolved.cfg")

    def add(self, name):
        if name not in self.data["files"]:
            self.data["files"].append(name)

    def note(self, text):
        self.data["notes"].append(text)

    def close(self, status, abort_reason=None, abort_time=None):
        self.data["status"] = status
        self.data["abort_reason"] = abort_reason
        self.data["abort_time"] = abort_time
        self.data["ended_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        with open(os.path.join(self.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _settings_from_config(cfg):
    return RunSettings(
        s=cfg["kernel.s"],
        beta=cfg["run.beta"],
        t_end=cfg["run.t_end"],
        r=cfg["run.r"],
        dt=cfg["run.dt"],
        dx=cfg["run.dx"],
        domain=tuple(cfg["run.domain"]),
        split_gamma=cfg["operator.split_gamma"],
        expand_tol=cfg["run.expand_tol"],
        expand_margin=cfg["run.expand_margin"],
        max_add=cfg["run.max_add"],
        levels=tuple(cfg["run.levels"]),
        snapshot_every=cfg["run.snapshot_every"],
        level_every=cfg["run.level_every"],
        initial_height=cfg["run.initial_height"],
        initial_edge=cfg["run.initial_edge"],
        initial_smooth=cfg["run.initial_smooth"],
    )


def kernel_from_config(cfg):
    kind = cfg["kernel.kind"]
    if kind == "fractional":
        return fractional_kernel(
            cfg["kernel.s"],
            norm_const=cfg["kernel.norm_const"],
            J0=cfg["kernel.J0"],
            J1=cfg["kernel.J1"],
            R0=cfg["kernel.R0"],
        )
    return truncated_algebraic_kernel(
        cfg["kernel.s"], J0=cfg["kernel.J0"], J1=cfg["kernel.J1"], R0=cfg["kernel.R0"]
    )


class _StoredProfile:
    """Snapshot reconstructed from CSV; duck-types GridState for the fits."""

    def __init__(self, t, x, u):
        self.t = t
        self._x = np.asarray(x)
        self.values = np.asarray(u)

    def x(self):
        return self._x


def _exponent_window(cfg, times):
    finite = [t for t in times if t > 0]
    if not finite:
        return None
    lo = max(cfg["diagnostics.t_fit_min"], finite[-1] - cfg["diagnostics.fit_fraction"] * (finite[-1] - finite[0]))
    return (lo, finite[-1])


def _emit_diagnostics(manifest, cfg, out_dir, level_data, snapshots):
    """Shared by simulate (in-memory data) and analyze (reloaded data).

    ``level_data`` maps lambda -> (t_array, x_array); ``snapshots`` is a list
    of objects with .t, .values, .x().
    """
    # exponent fits per level
    rows = []
    for lam, (ts, xs) in sorted(level_data.items()):
        window = _exponent_window(cfg, ts)
        if window is None:
            manifest.note("exponent fit skipped for level %g: no positive times" % lam)
            continue
        series = LevelSeries(lam, ts, xs)
        try:
            fit = exponent_fit(series, window)
        except ValueError as exc:
            manifest.note("exponent fit skipped for level %g: %s" % (lam, exc))
            continue
        rows.append(
            (
                float(lam),
                fit.slope,
                fit.intercept,
                fit.rms_residual,
                str(fit.count),
                fit.window[0],
                fit.window[1],
            )
        )
    _write_csv(
        os.path.join(out_dir, "exponent_fits.csv"),
        ["lambda", "slope", "intercept", "rms_residual", "count", "window_lo", "window_hi"],
        rows,
    )
    manifest.add("exponent_fits.csv")

    flattening = []
    if cfg["diagnostics.emit_tail"]:
        s = cfg["kernel.s"]
        tail_rows = []
        for snap in snapshots:
            if snap.t <= 0:
                continue
            try:
                fixed_t, free_t = tail_fit(snap, s, cfg["diagnostics.tail_window"])
                tail_rows.append((snap.t, "fixed", fixed_t.C, fixed_t.exponent, fixed_t.residual))
                tail_rows.append((snap.t, "free", free_t.C, free_t.exponent, free_t.residual))
            except ValueError as exc:
                manifest.note("tail fit skipped at t=%s: %s" % (_fmt(snap.t), exc))
            try:
                fixed_f, _ = tail_fit(snap, s, cfg["diagnostics.flatten_window"])
                flattening.append((snap.t, fixed_f.C, fixed_f.residual))
            except ValueError as exc:
                manifest.note("flattening fit skipped at t=%s: %s" % (_fmt(snap.t), exc))
        _write_csv(
            os.path.join(out_dir, "tail_fits.csv"),
            ["t", "mode", "C", "exponent", "residual"],
            tail_rows,
        )
        manifest.add("tail_fits.csv")
        _write_csv(
            os.path.join(out_dir, "flattening.csv"), ["t", "C", "residual"], flattening
        )
        manifest.add("flattening.csv")

    # regime block (+ flattening late-window linear fit when available)
    lines = []
    report = regime_classify(cfg["kernel.s"], cfg["run.beta"])
    for key, val in report.lines():
        lines.append("%s = %s" % (key, val))
    if len(flattening) >= 3:
        ts = np.array([f[0] for f in flattening])
        Cs = np.array([f[1] for f in flattening])
        t_lo = ts[-1] - cfg["diagnostics.late_fraction"] * (ts[-1] - ts[0])
        m = ts >= t_lo
        A = np.column_stack([ts[m], np.ones(int(m.sum()))])
        coef, _, _, _ = np.linalg.lstsq(A, Cs[m], rcond=None)
        fitted = A @ coef
        dev = float(np.max(np.abs(Cs[m] - fitted) / np.abs(fitted)))
        lines.append("flattening_slope = %s" % _fmt(float(coef[0])))
        lines.append("flattening_intercept = %s" % _fmt(float(coef[1])))
        lines.append("flattening_max_rel_dev = %s" % _fmt(dev))
        lines.append("flattening_window_lo = %s" % _fmt(float(t_lo)))
        lines.append("flattening_window_hi = %s" % _fmt(float(ts[-1])))
    with open(os.path.join(out_dir, "regime.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest.add("regime.txt")


def simulate_cmd(cfg, out_dir):
    """Run a simulation and persist snapshots, level series and diagnostics."""
    require(cfg, ("kernel.s", "run.beta", "run.t_end"), "simulate")
    if cfg["kernel.kind"] != "fractional":
        raise ConfigError(
            "key kernel.kind: simulate uses the fractional stepping scheme; "
            "got %r" % cfg["kernel.kind"]
        )
    settings = _settings_from_config(cfg)
    manifest = _Manifest(out_dir, "simulate", cfg)

    traj = run(settings)

    lam_list = sorted(traj.level_positions.keys())
    header = ["t"] + ["x_%g" % lam for lam in lam_list]
    ts = traj.level_times
    rows = []
    for i, t in enumerate(ts):
        rows.append(tuple([float(t)] + [float(traj.level_positions[lam][i]) for lam in lam_list]))
    _write_csv(os.path.join(out_dir, "levels.csv"), header, rows)
    manifest.add("levels.csv")

    index_rows = []
    for i, snap in enumerate(traj.snapshots):
        name = "snapshot_%04d.csv" % i
        _write_csv(
            os.path.join(out_dir, name),
            ["x", "u"],
            zip((float(v) for v in snap.x()), (float(v) for v in snap.values)),
        )
        manifest.add(name)
        index_rows.append((float(snap.t), name))
    _write_csv(os.path.join(out_dir, "snapshots_index.csv"), ["t", "file"], index_rows)
    manifest.add("snapshots_index.csv")

    level_data = {
        lam: (np.asarray(ts, dtype=float), np.asarray(traj.level_positions[lam], dtype=float))
        for lam in lam_list
    }
    _emit_diagnostics(manifest, cfg, out_dir, level_data, traj.snapshots)

    manifest.data["max_bounds_violation"] = traj.max_bounds_violation
    manifest.data["max_monotone_violation"] = traj.max_monotone_violation
    if traj.status == "aborted":
        manifest.close("aborted", traj.abort_reason, traj.abort_time)
        return EXIT_NUMERIC
    manifest.close("completed")
    return EXIT_OK


def _params_from_config(cfg, need_preset_fields):
    s = cfg["kernel.s"]
    beta = cfg["subsolution.beta"]
    eps = cfg["subsolution.eps"]
    if cfg.get("subsolution.kappa") is None:
        require(cfg, ("subsolution.sigma", "subsolution.D"), "certify (preset mode)")
        return preset_params(eps, cfg["subsolution.sigma"], cfg["subsolution.D"], beta, s)
    sigma = cfg["subsolution.sigma"] if cfg.get("subsolution.sigma") is not None else 1.0
    D = cfg["subsolution.D"] if cfg.get("subsolution.D") is not None else 1.0
    return SubsolutionParams(
        eps, cfg["subsolution.kappa"], cfg["subsolution.gamma"], sigma, D, beta, s
    )


def certify_cmd(cfg, out_dir):
    """Certify the requested zone inequalities; exit 0 iff all zones pass."""
    require(cfg, ("kernel.s",), "certify")
    zones = [z.strip() for z in cfg["subsolution.zones"].split(",") if z.strip()]
    if not zones:
        raise ConfigError("key subsolution.zones: zone list is empty")
    for z in zones:
        if z not in ZONES:
            raise ConfigError("key subsolution.zones: unknown zone %r" % z)
    spec = kernel_from_config(cfg)
    params = None
    if any(z != "barrier" for z in zones):
        require(cfg, ("subsolution.eps", "subsolution.beta"), "certify")
        params = _params_from_config(cfg, True)
    nu = cfg.get("subsolution.nu")
    barrier_kappa = cfg.get("subsolution.barrier_kappa")
    if "barrier" in zones:
        require(cfg, ("subsolution.nu",), "certify (barrier zone)")
        if barrier_kappa is None:
            barrier_kappa = 1.0 / (2.0 * spec.s * spec.J0 * nu)

    manifest = _Manifest(out_dir, "certify", cfg)
    reports = []
    all_samples = []
    try:
        for z in zones:
            rep = certify(
                params if z != "barrier" else None,
                z,
                spec,
                t_samples=cfg["subsolution.t_samples"],
                x_samples=cfg["subsolution.x_samples"],
                tolerance=cfg["subsolution.tolerance"],
                t_range=tuple(cfg["subsolution.t_range"]),
                nu=nu,
                barrier_kappa=barrier_kappa,
                quad_tol=cfg["subsolution.quad_tol"],
            )
            reports.append(rep)
            all_samples.extend((t, x, r, z) for (t, x, r) in rep.samples)
    except QuadratureError as exc:
        manifest.note("quadrature failure: %s (at %r)" % (exc, exc.where))
        manifest.close("aborted", str(exc), None)
        return EXIT_NUMERIC

    _write_csv(
        os.path.join(out_dir, "residuals.csv"),
        ["t", "x", "residual", "zone"],
        [(float(t), float(x), float(r), z) for (t, x, r, z) in all_samples],
    )
    manifest.add("residuals.csv")
    ok = all(r.passed for r in reports)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(str(r) + "\n")
        fh.write("overall: %s\n" % ("pass" if ok else "FAIL"))
    manifest.add("report.txt")
    manifest.close("completed")
    return EXIT_OK if ok else EXIT_CERTIFY


def analyze_cmd(cfg, run_dir, out_dir):
    """Recompute diagnostics from stored outputs without re-simulation."""
    require(cfg, ("kernel.s", "run.beta"), "analyze")
    man_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(man_path):
        raise CommandError("missing manifest: %s" % man_path, EXIT_USAGE)
    try:
        with open(man_path, "r", encoding="utf-8") as fh:
            stored = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CommandError("corrupt manifest %s: %s" % (man_path, exc), EXIT_USAGE)

    for name in ("levels.csv", "snapshots_index.csv"):
        if name not in stored.get("files", []):
            raise CommandError(
                "run directory %s lacks %s (not a simulate output?)" % (run_dir, name),
                EXIT_USAGE,
            )

    path = os.path.join(run_dir, "levels.csv")
    header, rows = _read_csv(path)
    if header[0] != "t" or any(not h.startswith("x_") for h in header[1:]):
        raise CommandError("file %s: unexpected level-series header" % path, EXIT_USAGE)
    lams = [float(h[2:]) for h in header[1:]]
    data = np.array([_floats(path, i + 2, r) for i, r in enumerate(rows)])
    level_data = {
        lam: (data[:, 0], data[:, 1 + j]) for j, lam in enumerate(lams)
    }

    idx_path = os.path.join(run_dir, "snapshots_index.csv")
    _, idx_rows = _read_csv(idx_path, ncols=2)
    snapshots = []
    for i, (t_str, name) in enumerate(idx_rows):
        t = _floats(idx_path, i + 2, [t_str])[0]
        spath = os.path.join(run_dir, name)
        if not os.path.exists(spath):
            raise CommandError("missing snapshot file %s" % spath, EXIT_USAGE)
        _, srows = _read_csv(spath, ncols=2)
        arr = np.array([_floats(spath, j + 2, r) for j, r in enumerate(srows)])
        snapshots.append(_StoredProfile(t, arr[:, 0], arr[:, 1]))

    manifest = _Manifest(out_dir, "analyze", cfg)
    _emit_diagnostics(manifest, cfg, out_dir, level_data, snapshots)
    manifest.close("completed")
    return EXIT_OK
