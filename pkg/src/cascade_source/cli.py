"""Command-line interface.

Subcommands: simulate, scaling, variance-profile, z-check, verify-lattice,
channel-info. Data goes to files under the config's output directory;
diagnostics to stderr; the exit status is 0 iff everything succeeded.

The effective config (defaults filled) is echoed into the output
directory as JSON; re-running from that echo reproduces results
byte-identically.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import harness, lattice
from .config import ConfigError, load_config


def _fail(msg: str) -> int:
    print(msg, file=sys.stderr)
    return 1


def _load(path: str):
    return load_config(path)


def _prepare_output(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = dict(cfg.effective_dict(), config_hash=cfg.config_hash())
    (out / "effective_config.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    return out


def _write_records(path: Path, cfg, records) -> None:
    with path.open("w") as fh:
        for rec in records:
            row = rec.to_dict()
            row["config_hash"] = cfg.config_hash()
            row["master_seed"] = cfg.master_seed
            fh.write(json.dumps(row, sort_keys=True) + "\n")


SUMMARY_FIELDS = [
    "trials", "mean_stop_time", "mean_squared_error", "mean_loss",
    "truncation_rate", "config_hash", "master_seed",
]


def cmd_simulate(args) -> int:
    cfg = _load(args.config)
    out = _prepare_output(cfg)
    records = harness.run_batch(cfg)
    _write_records(out / "results.jsonl", cfg, records)
    summary = harness.batch_summary(records)
    summary["config_hash"] = cfg.config_hash()
    summary["master_seed"] = cfg.master_seed
    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        writer.writerow({k: summary[k] for k in SUMMARY_FIELDS})
    print(
        f"trials={summary['trials']} mean_T={summary['mean_stop_time']:.4g} "
        f"mean_loss={summary['mean_loss']:.6g} "
        f"truncation_rate={summary['truncation_rate']:.3g}"
    )
    return 0


SCALING_FIELDS = [
    "n", "k", "trials", "mean_T", "q10", "q50", "q90", "mean_loss",
    "predicted_scale", "ratio", "config_hash", "master_seed",
]


def cmd_scaling(args) -> int:
    cfg = _load(args.config)
    if len(cfg.k_grid) < 1:
        return _fail("scaling requires a non-empty, strictly increasing k_grid")
    out = _prepare_output(cfg)
    rows = harness.scaling_study(
        cfg.dimension, cfg.k_grid, cfg.channel, cfg.rule, cfg.trials,
        cfg.master_seed, accelerated=cfg.accelerated, workers=cfg.workers,
    )
    with (out / "scaling.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SCALING_FIELDS)
        writer.writeheader()
        for row in rows:
            rec = {f: getattr(row, f) for f in SCALING_FIELDS[:-2]}
            rec["config_hash"] = cfg.config_hash()
            rec["master_seed"] = cfg.master_seed
            writer.writerow(rec)
    ratios = [r.ratio for r in rows]
    band = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
    print(f"rows={len(rows)} ratio_band={band:.4g}")
    return 0


def cmd_variance_profile(args) -> int:
    cfg = _load(args.config)
    if cfg.rule.kind != "fixed_horizon":
        return _fail("variance-profile requires rule.kind = 'fixed_horizon'")
    out = _prepare_output(cfg)
    rows = harness.variance_transition_profile(cfg)
    with (out / "variance_profile.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["t", "mean", "q10", "q50", "q90", "config_hash", "master_seed"]
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(dict(row, config_hash=cfg.config_hash(), master_seed=cfg.master_seed))
    prior = rows[0]["q50"] if rows else float("nan")
    final = rows[-1]["q50"] if rows else float("nan")
    print(f"steps={len(rows)} prior_median_var={prior:.6g} final_median_var={final:.6g}")
    return 0


def cmd_z_check(args) -> int:
    cfg = _load(args.config)
    out = _prepare_output(cfg)
    try:
        report = harness.normalizer_concentration_check(cfg)
    except ValueError as exc:
        return _fail(str(exc))
    with (out / "z_check.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["t", "exceedance", "bound", "bound_applies", "config_hash", "master_seed"],
        )
        writer.writeheader()
        for row in report["rows"]:
            writer.writerow(dict(row, config_hash=cfg.config_hash(), master_seed=cfg.master_seed))
    worst = max((r["exceedance"] for r in report["rows"] if r["bound_applies"]), default=0.0)
    print(
        f"n={report['n']} eps={report['eps']} bound={report['bound']:.4g} "
        f"worst_applicable_exceedance={worst:.4g}"
    )
    return 0


def cmd_verify_lattice(args) -> int:
    if args.max_d > 4 or args.max_t > 15:
        return _fail("verify-lattice supports max-d <= 4 and max-t <= 15 (enumeration cost)")
    ok = True
    print("d t closed_sphere bfs_sphere closed_ball enum_ball lower upper")
    for d in range(1, args.max_d + 1):
        bfs = lattice.bfs_sphere_sizes(d, args.max_t)
        for t in range(args.max_t + 1):
            sphere = lattice.sphere_size(d, t)
            ball = lattice.ball_size(d, t)
            enum = len(lattice.enumerate_ball((0,) * d, t))
            row_ok = sphere == bfs[t] and ball == sum(bfs[: t + 1]) and ball == enum
            lo_s = up_s = "-"
            if d >= 2 and t >= d:
                lo, up = lattice.sphere_bounds(d, t)
                row_ok = row_ok and lo <= sphere <= up
                lo_s, up_s = f"{lo:.2f}", f"{up:.2f}"
            ok = ok and row_ok
            flag = "" if row_ok else "  MISMATCH"
            print(f"{d} {t} {sphere} {bfs[t]} {ball} {enum} {lo_s} {up_s}{flag}")
    if not ok:
        return _fail("lattice verification failed")
    print("all rows match")
    return 0


def cmd_channel_info(args) -> int:
    cfg = _load(args.config)
    m = cfg.channel.moments()
    if cfg.channel.is_degenerate:
        print("warning: Q0 == Q1 (test mode); all moments are degenerate", file=sys.stderr)
    print(f"kind     = {cfg.channel.kind}")
    print(f"alpha    = {m.alpha:.10g}")
    print(f"lambda0  = {m.lambda0:.10g}")
    print(f"lambda1  = {m.lambda1:.10g}")
    print(f"lambda   = {m.lam:.10g}")
    print(f"kl01     = {m.kl01:.10g}")
    print(f"kl10     = {m.kl10:.10g}")
    print(f"d_mean   = {m.d_mean:.10g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-source",
        description="Cascade source localization: simulation, stopping rules, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in [
        ("simulate", cmd_simulate),
        ("scaling", cmd_scaling),
        ("variance-profile", cmd_variance_profile),
        ("z-check", cmd_z_check),
        ("channel-info", cmd_channel_info),
    ]:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a TOML or JSON experiment config")
        p.set_defaults(func=fn)

    p = sub.add_parser("verify-lattice")
    p.add_argument("--max-d", type=int, default=3)
    p.add_argument("--max-t", type=int, default=12)
    p.set_defaults(func=cmd_verify_lattice)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"I/O error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
