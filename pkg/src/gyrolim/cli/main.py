"""``gyrolim <kind> --config <path> [--out <dir>] [--seed <u64>] [--jobs <k>]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path

from gyrolim import __version__
from gyrolim.cli.config import KINDS, STOCHASTIC, ConfigError, describe_defaults, load_config, with_overrides
from gyrolim.cli.manifest import RunManifest
from gyrolim.cli.plots import emit_plots

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _driver(kind):
    if kind == "sweep":
        from gyrolim.cli.sweep import run_convergence_sweep

        return lambda cfg, out, jobs, log: run_convergence_sweep(cfg, out, jobs, log)
    from gyrolim.cli import drivers
    from gyrolim.cli.quantize_check import run_quantize_check

    table = {
        "euler": drivers.run_euler_kind,
        "nbody": drivers.run_nbody_kind,
        "coercivity": drivers.run_coercivity_kind,
        "quantize-check": run_quantize_check,
    }
    fn = table[kind]
    return lambda cfg, out, jobs, log: fn(cfg, out, log)


def output_root(cli_out, cfg_out) -> Path:
    """--out, then $GYROLIM_OUT, then the config's ``out``, then ./runs."""
    for cand in (cli_out, os.environ.get("GYROLIM_OUT"), cfg_out):
        if cand:
            return Path(cand)
    return Path("runs")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gyrolim",
        description="Run a gyrokinetic mean-field experiment and write CSV, SVG and a manifest.",
        epilog=describe_defaults() + "\n\nOutput root: --out, else $GYROLIM_OUT, else config 'out', else ./runs.\n"
               "Exit status: 0 when every hard assertion passes, 1 otherwise (see failures.json), 2 on usage errors.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="flat key = value file")
    p.add_argument("--out", help="output root directory")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep cells")
    return p


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg, where = load_config(args.config)
        if "kind" in where and cfg.kind != args.kind:
            raise ConfigError(f"{args.config}:{where['kind']}: config kind '{cfg.kind}' conflicts with '{args.kind}'")
        root = output_root(args.out, cfg.out)
        cfg = with_overrides(cfg, kind=args.kind, seed=args.seed, out=str(root))
        if cfg.kind in STOCHASTIC and cfg.seed is None:
            raise ConfigError(f"a seed is required for '{cfg.kind}' (config key 'seed' or --seed)")
    except ConfigError as exc:
        print(f"gyrolim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    run_dir = root / cfg.kind
    run_dir.mkdir(parents=True, exist_ok=True)
    stale = run_dir / "failures.json"
    if stale.exists():
        stale.unlink()
    started = _now()
    print(f"gyrolim {__version__}: {cfg.kind} -> {run_dir}")
    files, failures, status = [], [], "ok"
    try:
        _, files, failures = _driver(cfg.kind)(cfg, run_dir, args.jobs, print)
        files = list(files) + emit_plots(run_dir)
    except Exception as exc:
        status = "error"
        failures = [{"check": "exception", "type": type(exc).__name__, "message": str(exc),
                     "traceback": traceback.format_exc()}]
    if failures:
        status = "failed" if status == "ok" else status
        stale.write_text(json.dumps(failures, indent=2, default=float) + "\n", encoding="utf-8")
        files.append(stale)
    RunManifest.build(run_dir, [f for f in files if Path(f).is_file()], config=cfg.snapshot(), version=__version__,
                      started=started, finished=_now(), status=status).write(run_dir)
    for f in failures:
        print(f"FAIL {f['check']}: " + ", ".join(f"{k}={v}" for k, v in f.items() if k not in ("check", "traceback")))
    print("PASS" if not failures else f"{len(failures)} failure(s); see {stale}")
    return EXIT_OK if not failures else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
