"""Command-line entry point: ``python -m stoeuler``.

Exit codes: 0 when every hard invariant held, 1 when one failed (a
``failure.json`` record is written), 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import PRESETS, ConfigError, RunConfig
from .ensemble import EnsembleStats, run_ensemble

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2

CSV_HEADER = (
    "t,mean_energy,time_avg_energy,mean_mass,mean_momentum,momentum_stderr,"
    "min_rho,itô_injection_rate,invariant_violations"
)
MASS_TOLERANCE = 1e-12


def _fmt(x) -> str:
    return "%.17g" % float(x)


def stats_csv(stats: EnsembleStats) -> str:
    rows = [CSV_HEADER]
    for i in range(stats.t.size):
        cols = [
            stats.t[i],
            stats.mean_energy[i],
            stats.time_avg_energy[i],
            stats.mean_mass[i],
            stats.mean_momentum[i],
            stats.momentum_stderr[i],
            stats.min_rho[i],
            stats.ito_injection_rate[i],
        ]
        rows.append(",".join(_fmt(c) for c in cols) + f",{int(stats.invariant_violations[i])}")
    return "\n".join(rows) + "\n"


def check_invariants(stats: EnsembleStats, kappa_bound) -> List[dict]:
    """Hard checks: realization failures, mass, positivity, invariant region."""
    problems = []
    for rid, msg in sorted(stats.failures.items()):
        problems.append({"check": "realization", "realization_id": rid, "detail": msg})
    if stats.n_realizations == 0:
        return problems
    mass = stats.per_realization("mass")
    drift = np.abs(mass - mass[:, :1]) / np.maximum(np.abs(mass[:, :1]), np.finfo(float).tiny)
    worst = int(np.argmax(drift.max(axis=1)))
    if drift.max() > MASS_TOLERANCE:
        problems.append({"check": "mass", "realization_id": stats.realization_ids[worst],
                         "relative_drift": float(drift.max())})
    if not np.min(stats.min_rho) > 0:
        problems.append({"check": "positivity", "min_rho": float(np.min(stats.min_rho))})
    if kappa_bound is not None and stats.invariant_violations[-1] > 0:
        problems.append({"check": "invariant_region", "kappa_bound": kappa_bound,
                         "violations": int(stats.invariant_violations[-1])})
    return problems


def _summary(cfg: RunConfig, stats: EnsembleStats, problems) -> dict:
    return {
        "preset": cfg.preset,
        "realizations": stats.n_realizations,
        "horizon": cfg.horizon,
        "final_time_avg_energy": float(stats.time_avg_energy[-1]),
        "final_time_avg_energy_stderr": float(stats.time_avg_stderr[-1]),
        "final_mean_energy": float(stats.mean_energy[-1]),
        "initial_mean_momentum": float(stats.mean_momentum[0]),
        "final_mean_momentum": float(stats.mean_momentum[-1]),
        "min_rho": float(np.min(stats.min_rho)),
        "invariant_violations": int(stats.invariant_violations[-1]),
        "mean_ito_injection_rate": float(np.mean(stats.ito_injection_rate)),
        "nominal_injection_rate": float(np.mean(stats.nominal_injection_rate)),
        "passed": not problems,
    }


def run(config: RunConfig) -> int:
    """Resolve ``config``, run the ensemble and write the outputs.

    Writes ``stats.csv``, ``summary.json`` and ``config.toml`` to the output
    directory, plus ``snapshots/`` when enabled and ``failure.json`` when a
    hard invariant fails.
    """
    try:
        cfg = config.resolve()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(cfg.to_toml(), encoding="utf-8")

    stats = run_ensemble(cfg.ensemble_config())
    (out / "stats.csv").write_bytes(stats_csv(stats).encode("utf-8"))
    problems = check_invariants(stats, cfg.kappa_bound)
    summary = _summary(cfg, stats, problems)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if stats.snapshots is not None:
        stats.snapshots.save(out / "snapshots")
    failure = out / "failure.json"
    if problems:
        failure.write_text(json.dumps({"failures": problems}, indent=2) + "\n", encoding="utf-8")
        return EXIT_INVARIANT
    if failure.exists():
        failure.unlink()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="python -m stoeuler", description="Run a stochastic shallow-water ensemble.")
    p.add_argument("--config", metavar="PATH", help="TOML configuration file")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--realizations", type=int, metavar="N")
    p.add_argument("--horizon", type=float, metavar="T")
    p.add_argument("--cells", type=int, metavar="N")
    p.add_argument("--tau", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--snapshots", action="store_true", default=None, help="write the snapshot store")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    flags = RunConfig(
        preset=args.preset,
        seed=args.seed,
        realizations=args.realizations,
        horizon=args.horizon,
        cells=args.cells,
        tau=args.tau,
        epsilon=args.epsilon,
        output_dir=args.out,
        emit_snapshots=args.snapshots,
    )
    return base.merged(flags)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)
