"""Flat key = value configuration with strict schema and paper defaults.

The format is line-oriented UTF-8 text: ``section.key = value`` with ``#``
comments and blank lines.  Unknown keys are rejected; missing keys are filled
with defaults (dt = 0.01, dx = 0.2, domain -1000..1000, max_add = 150,
split_gamma = 1 + s, ...).  A resolved configuration serializes back to text
that re-parses to the identical resolved state, which is what run manifests
store.

Environment overrides: any key may be overridden by a variable named
``ALLEEFRONT_<KEY>`` where the dots of the key are replaced by underscores
and letters are uppercased (run.dt -> ALLEEFRONT_RUN_DT).
"""

from __future__ import annotations

import os

from .kernels import fractional_normalization

__all__ = ["ConfigError", "parse_config", "serialize_config", "ENV_PREFIX", "env_name"]

ENV_PREFIX = "ALLEEFRONT_"


class ConfigError(ValueError):
    """Malformed document, unknown key, or out-of-range value."""


def env_name(key):
    return ENV_PREFIX + key.replace(".", "_").upper()


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError("key %s: expected a number, got %r" % (key, raw))


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("key %s: expected an integer, got %r" % (key, raw))


def _parse_bool(key, raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError("key %s: expected true/false, got %r" % (key, raw))


def _parse_floatlist(key, raw):
    try:
        return tuple(float(p) for p in raw.split(",") if p.strip() != "")
    except ValueError:
        raise ConfigError("key %s: expected comma-separated numbers, got %r" % (key, raw))


def _parse_pair(key, raw):
    vals = _parse_floatlist(key, raw)
    if len(vals) != 2:
        raise ConfigError("key %s: expected exactly two numbers, got %r" % (key, raw))
    return vals


_PARSERS = {
    "float": _parse_float,
    "int": _parse_int,
    "str": lambda key, raw: raw.strip(),
    "bool": _parse_bool,
    "floatlist": _parse_floatlist,
    "pair": _parse_pair,
}

# key -> (type, default); None means unset until resolution or simply unset
_SCHEMA = {
    "kernel.kind": ("str", "fractional"),
    "kernel.s": ("float", None),
    "kernel.norm_const": ("float", None),
    "kernel.J0": ("float", None),
    "kernel.J1": ("float", None),
    "kernel.R0": ("float", 1.0),
    "operator.split_gamma": ("float", None),
    "operator.quad_tol": ("float", 1e-10),
    "run.dt": ("float", 0.01),
    "run.dx": ("float", 0.2),
    "run.domain": ("pair", (-1000.0, 1000.0)),
    "run.t_end": ("float", None),
    "run.beta": ("float", None),
    "run.r": ("float", 1.0),
    "run.max_add": ("int", 150),
    "run.expand_tol": ("float", 1e-2),
    "run.expand_margin": ("int", 10),
    "run.levels": ("floatlist", (0.5,)),
    "run.snapshot_every": ("float", 1.0),
    "run.level_every": ("int", 1),
    "run.initial_height": ("float", 1.0),
    "run.initial_edge": ("float", 0.0),
    "run.initial_smooth": ("int", 0),
    "diagnostics.t_fit_min": ("float", 5.0),
    "diagnostics.fit_fraction": ("float", 0.5),
    "diagnostics.tail_window": ("pair", (1e-4, 1e-2)),
    "diagnostics.flatten_window": ("pair", (1e-5, 1e-2)),
    "diagnostics.late_fraction": ("float", 0.5),
    "diagnostics.emit_tail": ("bool", True),
    "subsolution.eps": ("float", None),
    "subsolution.sigma": ("float", None),
    "subsolution.D": ("float", None),
    "subsolution.beta": ("float", None),
    "subsolution.kappa": ("float", None),
    "subsolution.gamma": ("float", None),
    "subsolution.zones": ("str", "blue,orange,green,farfield"),
    "subsolution.t_samples": ("int", 32),
    "subsolution.x_samples": ("int", 64),
    "subsolution.tolerance": ("float", 1e-6),
    "subsolution.quad_tol": ("float", 1e-9),
    "subsolution.t_range": ("pair", (1.0, 100.0)),
    "subsolution.nu": ("float", None),
    "subsolution.barrier_kappa": ("float", None),
}

_KINDS = ("fractional", "truncated-algebraic")


def _check_ranges(cfg):
    def bad(key, why):
        raise ConfigError("key %s: %s (got %r)" % (key, why, cfg.get(key)))

    if cfg["kernel.kind"] not in _KINDS:
        bad("kernel.kind", "must be one of %s" % (_KINDS,))
    s = cfg.get("kernel.s")
    if s is not None:
        if s <= 0:
            bad("kernel.s", "must be positive")
        if cfg["kernel.kind"] == "fractional" and not s < 1.0:
            bad("kernel.s", "fractional kind requires s in (0, 1)")
    for key in ("kernel.norm_const", "kernel.J0"):
        if cfg.get(key) is not None and cfg[key] <= 0:
            bad(key, "must be positive")
    if cfg.get("kernel.J1") is not None and cfg["kernel.J1"] < 0:
        bad("kernel.J1", "must be nonnegative")
    if cfg["kernel.R0"] < 1:
        bad("kernel.R0", "must be >= 1")
    g = cfg.get("operator.split_gamma")
    if g is not None and s is not None and cfg["kernel.kind"] == "fractional":
        if not 2.0 * s < g < 2.0:
            bad("operator.split_gamma", "must lie in (2s, 2) = (%g, 2)" % (2 * s))
    if cfg["run.dt"] <= 0:
        bad("run.dt", "must be positive")
    if cfg["run.dx"] <= 0:
        bad("run.dx", "must be positive")
    lo, hi = cfg["run.domain"]
    if not lo < hi:
        bad("run.domain", "must be an increasing pair")
    if cfg.get("run.t_end") is not None and cfg["run.t_end"] < 0:
        bad("run.t_end", "must be nonnegative")
    if cfg.get("run.beta") is not None and cfg["run.beta"] < 1.0:
        bad("run.beta", "must be >= 1")
    if cfg["run.r"] < 0:
        bad("run.r", "must be nonnegative")
    if cfg["run.max_add"] < 0:
        bad("run.max_add", "must be >= 0")
    if not 0.0 < cfg["run.expand_tol"] < 1.0:
        bad("run.expand_tol", "must lie in (0, 1)")
    if cfg["run.expand_margin"] < 1:
        bad("run.expand_margin", "must be >= 1")
    for lam in cfg["run.levels"]:
        if not 0.0 < lam < 1.0:
            bad("run.levels", "levels must lie in (0, 1)")
    if cfg["run.snapshot_every"] <= 0:
        bad("run.snapshot_every", "must be positive")
    if cfg["run.level_every"] < 1:
        bad("run.level_every", "must be >= 1")
    if not 0.0 < cfg["run.initial_height"] <= 1.0:
        bad("run.initial_height", "must lie in (0, 1]")
    if cfg["run.initial_smooth"] < 0:
        bad("run.initial_smooth", "must be >= 0")
    for key in ("diagnostics.tail_window", "diagnostics.flatten_window"):
        wlo, whi = cfg[key]
        if not 0.0 < wlo < whi:
            bad(key, "must satisfy 0 < lo < hi")
    if not 0.0 < cfg["diagnostics.fit_fraction"] <= 1.0:
        bad("diagnostics.fit_fraction", "must lie in (0, 1]")
    if not 0.0 < cfg["diagnostics.late_fraction"] <= 1.0:
        bad("diagnostics.late_fraction", "must lie in (0, 1]")
    if cfg.get("subsolution.eps") is not None and not 0.0 < cfg["subsolution.eps"] < 1.0:
        bad("subsolution.eps", "must lie in (0, 1)")
    for key in (
        "subsolution.sigma",
        "subsolution.D",
        "subsolution.kappa",
        "subsolution.gamma",
        "subsolution.nu",
        "subsolution.barrier_kappa",
    ):
        if cfg.get(key) is not None and cfg[key] <= 0:
            bad(key, "must be positive")
    if cfg.get("subsolution.beta") is not None and cfg["subsolution.beta"] <= 1.0:
        bad("subsolution.beta", "must be > 1")
    for key in ("subsolution.t_samples", "subsolution.x_samples"):
        if cfg[key] < 1:
            bad(key, "must be >= 1")
    tlo, thi = cfg["subsolution.t_range"]
    if not 0.0 < tlo <= thi:
        bad("subsolution.t_range", "must satisfy 0 < lo <= hi")
    ko = (cfg.get("subsolution.kappa") is None, cfg.get("subsolution.gamma") is None)
    if ko[0] != ko[1]:
        raise ConfigError(
            "keys subsolution.kappa and subsolution.gamma must be given together "
            "(omit both for the preset coupling)"
        )


def _resolve(cfg):
    s = cfg.get("kernel.s")
    kind = cfg["kernel.kind"]
    if s is not None and not 0.0 < s < 1.0:
        s = None  # leave range reporting to the checks below
    if cfg.get("kernel.norm_const") is None:
        if kind == "fractional":
            if s is not None:
                cfg["kernel.norm_const"] = fractional_normalization(s)
        else:
            cfg["kernel.norm_const"] = 1.0
    nc = cfg.get("kernel.norm_const")
    if cfg.get("kernel.J0") is None:
        if kind == "fractional" and nc is not None:
            cfg["kernel.J0"] = max(nc, 1.0 / nc)
        elif kind == "truncated-algebraic":
            cfg["kernel.J0"] = 1.0
    if cfg.get("kernel.J1") is None:
        if kind == "fractional" and nc is not None and s is not None:
            cfg["kernel.J1"] = nc / (2.0 * (1.0 - s))
        elif kind == "truncated-algebraic":
            cfg["kernel.J1"] = 0.0
    if (
        cfg.get("operator.split_gamma") is None
        and kind == "fractional"
        and s is not None
    ):
        cfg["operator.split_gamma"] = 1.0 + s
    return cfg


def parse_config(text, env=None):
    """Parse and resolve a configuration document.

    ``env`` defaults to ``os.environ``; pass a mapping (possibly empty) to
    control overrides explicitly.  Returns a plain dict keyed by the dotted
    names; unset optional keys hold None.
    """
    raw = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("line %d: expected 'key = value', got %r" % (ln, line))
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError("line %d: unknown key %r" % (ln, key))
        if key in raw:
            raise ConfigError("line %d: duplicate key %r" % (ln, key))
        raw[key] = value

    if env is None:
        env = os.environ
    for key in _SCHEMA:
        override = env.get(env_name(key))
        if override is not None:
            raw[key] = override

    cfg = {}
    for key, (typ, default) in _SCHEMA.items():
        if key in raw:
            cfg[key] = _PARSERS[typ](key, raw[key])
        else:
            cfg[key] = default
    cfg = _resolve(cfg)
    _check_ranges(cfg)
    return cfg


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, int):
        return "%d" % value
    if isinstance(value, tuple):
        return ",".join("%.17g" % v for v in value)
    return str(value)


def serialize_config(cfg):
    """Render a resolved configuration; parse(serialize(cfg)) == cfg."""
    lines = []
    for key in _SCHEMA:
        value = cfg.get(key)
        if value is None:
            continue
        lines.append("%s = %s" % (key, _format_value(value)))
    return "\n".join(lines) + "\n"


def require(cfg, keys, command):
    """Raise a ConfigError naming the first missing key for this command."""
    for key in keys:
        if cfg.get(key) is None:
            raise ConfigError("command %r requires key %s" % (command, key))
