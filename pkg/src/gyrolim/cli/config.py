"""Flat ``key = value`` run configuration.

One pair per line, ``#`` starts a comment, blank lines are ignored. Lists are
comma separated. Unknown or repeated keys and invalid values are errors that
cite the offending line.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("euler", "nbody", "sweep", "quantize-check", "coercivity")
STOCHASTIC = ("nbody", "sweep", "coercivity")


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _ints(s: str):
    return [int(t) for t in s.split(",") if t.strip()]


def _floats(s: str):
    return [float(t) for t in s.split(",") if t.strip()]


@dataclass
class RunConfig:
    kind: str = "nbody"
    seed: int | None = None
    # grid for Euler fields
    L: float = 2.0
    n: int = 256
    # particles and scales
    N: list = field(default_factory=lambda: [64])
    eps: list = field(default_factory=lambda: [0.1])
    hbar: list = field(default_factory=list)  # empty: hbar = eps ** hbar_exp
    hbar_exp: float = 2.0
    dt: float = 1e-3
    dt_eps_ratio: float = 0.0  # > 0 caps dt at ratio * eps
    T: float = 1.0
    stride: int = 100
    records: int = 10  # observer intervals per sweep cell
    out: str = ""
    confinement: bool = False
    magnetic: bool = True
    gyro_sign: int = -1
    scheme: str = "strang-exact-rotation"
    force: str = "direct"
    bh_theta: float = 0.5
    delta_min: float = 1e-9
    # initial vorticity and Euler solver
    density: str = "bump"
    density_radius: float = 1.0
    sampling: str = "iid"
    blobs: int = 4096
    euler_dt: float = 0.05
    remesh_every: int = 0
    # sweep
    sweep_mode: str = "diagonal"
    assert_trend: bool = True
    cell_budget_s: float = 1800.0
    drift_tol: float = 0.0  # > 0 turns the Hamiltonian drift into a hard assertion
    # quantize-check
    trunc_M: list = field(default_factory=lambda: [16, 24, 32])
    trace_eps: float = 0.5
    trace_hbar: float = 0.1
    trace_tol: float = 1e-4
    theta_amp: float = 0.1
    qgrid_L: float = 4.0
    qgrid_n: int = 512
    # coercivity
    seeds: int = 20

    def hbar_for(self, eps_index: int) -> float:
        if self.hbar:
            return self.hbar[eps_index] if len(self.hbar) > 1 else self.hbar[0]
        return self.eps[eps_index] ** self.hbar_exp

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)


PARSERS = {
    "kind": str, "seed": int, "L": float, "n": int, "N": _ints, "eps": _floats, "hbar": _floats,
    "hbar_exp": float, "dt": float, "dt_eps_ratio": float, "T": float, "stride": int, "records": int, "out": str,
    "confinement": _bool, "magnetic": _bool, "gyro_sign": int, "scheme": str, "force": str,
    "bh_theta": float, "delta_min": float, "density": str, "density_radius": float, "sampling": str,
    "blobs": int,
    "euler_dt": float, "remesh_every": int, "sweep_mode": str, "assert_trend": _bool,
    "cell_budget_s": float, "drift_tol": float, "trunc_M": _ints, "trace_eps": float,
    "trace_hbar": float, "trace_tol": float, "theta_amp": float, "qgrid_L": float, "qgrid_n": int,
    "seeds": int,
}

HELP = {
    "kind": "experiment: " + ", ".join(KINDS),
    "seed": "master seed (required for nbody, sweep, coercivity)",
    "L": "half-width of the field grid [-L, L]^2",
    "n": "cells per axis of the field grid (even, >= 16)",
    "N": "particle counts (comma list)",
    "eps": "magnetic scales (comma list; paired with N in diagonal sweeps)",
    "hbar": "explicit hbar values; empty means hbar = eps ** hbar_exp",
    "hbar_exp": "exponent k in hbar = eps^k",
    "dt": "particle time step",
    "dt_eps_ratio": "if > 0, particle dt is min(dt, ratio * eps)",
    "T": "final time",
    "stride": "observer stride in particle steps (nbody)",
    "records": "observer intervals per sweep cell",
    "out": "output root (overridden by --out and GYROLIM_OUT)",
    "confinement": "add (eps/2N) sum |x|^2 to E1",
    "magnetic": "magnetic system (true) or plain Newton system (false)",
    "gyro_sign": "+1: gyration as written; -1: orientation whose drift is the Biot-Savart velocity",
    "scheme": "strang-exact-rotation or rk4-reference",
    "force": "direct or barnes-hut",
    "bh_theta": "Barnes-Hut opening angle",
    "delta_min": "collision guard on pair separation",
    "density": "initial vorticity: bump, gaussian, disk, chi-gaussian",
    "density_radius": "radius parameter of the bump/disk density",
    "sampling": "particle positions: iid (rejection sampling) or sobol (scrambled low-discrepancy points)",
    "blobs": "target vortex-blob count",
    "euler_dt": "vortex-blob RK4 step",
    "remesh_every": "remesh blobs every k Euler steps (0: never)",
    "sweep_mode": "diagonal (zip N and eps) or grid (all pairs)",
    "assert_trend": "treat the expected monotone trends as hard assertions",
    "cell_budget_s": "wall-clock budget per sweep cell in seconds",
    "drift_tol": "if > 0, max relative Hamiltonian drift allowed",
    "trunc_M": "Hermite truncation degrees for the trace identity",
    "trace_eps": "eps of the trace-identity symbol",
    "trace_hbar": "hbar of the trace-identity symbol",
    "trace_tol": "relative tolerance of the trace identity at the middle truncation",
    "theta_amp": "amplitude of the drift field theta in the quantized symbol",
    "qgrid_L": "half-width of the grid for initial-energy evaluation",
    "qgrid_n": "cells per axis of that grid",
    "seeds": "Monte-Carlo repetitions per N (coercivity)",
}


def _validate(cfg: RunConfig, where: dict):
    def bad(key, msg):
        loc = f" (line {where[key]})" if key in where else ""
        raise ConfigError(f"invalid value for '{key}'{loc}: {msg}")

    if cfg.kind not in KINDS:
        bad("kind", f"must be one of {', '.join(KINDS)}")
    for key in ("L", "dt", "hbar_exp", "euler_dt", "bh_theta", "delta_min", "density_radius",
                "trace_eps", "trace_hbar", "trace_tol", "qgrid_L", "cell_budget_s"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    for key in ("T", "dt_eps_ratio", "drift_tol", "theta_amp"):
        if getattr(cfg, key) < 0:
            bad(key, "must be non-negative")
    for key in ("n", "qgrid_n"):
        v = getattr(cfg, key)
        if v < 16 or v % 2:
            bad(key, "must be an even integer >= 16")
    for key in ("stride", "records", "blobs", "seeds"):
        if getattr(cfg, key) < 1:
            bad(key, "must be at least 1")
    if cfg.remesh_every < 0:
        bad("remesh_every", "must be non-negative")
    if not cfg.N or any(v < 1 for v in cfg.N):
        bad("N", "needs one or more positive integers")
    if not cfg.eps or any(not v > 0 for v in cfg.eps):
        bad("eps", "needs one or more positive numbers")
    if any(not v > 0 for v in cfg.hbar):
        bad("hbar", "values must be positive")
    if cfg.hbar and len(cfg.hbar) not in (1, len(cfg.eps)):
        bad("hbar", "give one value or one per eps")
    if not cfg.trunc_M or any(m < 4 for m in cfg.trunc_M):
        bad("trunc_M", "truncation degrees must be >= 4")
    if cfg.gyro_sign not in (1, -1):
        bad("gyro_sign", "must be 1 or -1")
    if cfg.scheme not in ("strang-exact-rotation", "rk4-reference"):
        bad("scheme", "must be strang-exact-rotation or rk4-reference")
    if cfg.force not in ("direct", "barnes-hut"):
        bad("force", "must be direct or barnes-hut")
    if cfg.density not in ("bump", "gaussian", "disk", "chi-gaussian"):
        bad("density", "must be bump, gaussian, disk or chi-gaussian")
    if cfg.sampling not in ("iid", "sobol"):
        bad("sampling", "must be iid or sobol")
    if cfg.sweep_mode not in ("diagonal", "grid"):
        bad("sweep_mode", "must be diagonal or grid")
    if cfg.sweep_mode == "diagonal" and cfg.kind == "sweep" and len(cfg.N) != len(cfg.eps):
        bad("N", "diagonal sweeps need as many N values as eps values")
    if cfg.seed is not None and cfg.seed < 0:
        bad("seed", "must be a non-negative integer")


def parse_text(text: str, source: str = "<config>") -> tuple[RunConfig, dict]:
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key not in PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in where:
            raise ConfigError(f"{source}: duplicate key '{key}' on lines {where[key]} and {lineno}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: invalid value for '{key}': {exc}") from None
        where[key] = lineno
    cfg = RunConfig(**values)
    _validate(cfg, where)
    return cfg, where


def parse_config(path) -> RunConfig:
    return load_config(path)[0]


def load_config(path) -> tuple[RunConfig, dict]:
    """Config plus the line number of every key given in the file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{p}: not valid UTF-8 ({exc})") from None
    return parse_text(text, str(p))


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    new = dataclasses.replace(cfg, **{k: v for k, v in kw.items() if v is not None})
    _validate(new, {})
    return new


def describe_defaults() -> str:
    base = RunConfig()
    rows = []
    for f in dataclasses.fields(base):
        val = getattr(base, f.name)
        if isinstance(val, list):
            val = ",".join(str(v) for v in val) or "(empty)"
        rows.append(f"  {f.name:<15} {str(val):<22} {HELP.get(f.name, '')}")
    return "config keys (default, meaning):\n" + "\n".join(rows)
