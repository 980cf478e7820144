"""Trial driver and batch experiment harness.

A trial samples a hidden source uniformly from the prior support, then
loops frame emission -> posterior update -> stopping-rule check until the
rule fires or t_max is hit (truncation, flagged but never dropped).

Determinism contract: a trial is a pure function of (config, master_seed,
trial_id). Each trial owns two independent random streams -- one for the
world (source draw and signal frames), one for rule-internal Monte Carlo
-- so switching stopping rules on paired seeds keeps the world
realization fixed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cascade import WorldState, get_window, next_frame
from .channels import ChannelPair
from .config import ExperimentConfig, default_t_max
from .lattice import ball_size
from .posterior import PosteriorState, uniform_prior, update
from .stopping import LookaheadEstimate, StoppingRule, t_plus_triggered, t_r_triggered


@dataclass
class TrialRecord:
    """Outcome of one simulated trial."""

    trial_id: int
    source: tuple[int, ...]
    stop_time: int
    squared_error: float
    infection_cost: int
    total_loss: float
    variance_trajectory: list[float]  # index 0 = prior variance, then t = 0, 1, ...
    log_z_trajectory: list[float]  # same indexing; index 0 = log n
    truncated: bool
    rule_diagnostics: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "trial-record/v1",
            "trial_id": self.trial_id,
            "source": list(self.source),
            "stop_time": self.stop_time,
            "squared_error": self.squared_error,
            "infection_cost": self.infection_cost,
            "total_loss": self.total_loss,
            "variance_trajectory": self.variance_trajectory,
            "log_z_trajectory": self.log_z_trajectory,
            "truncated": self.truncated,
            "rule_diagnostics": self.rule_diagnostics,
        }


def trial_streams(master_seed: int, trial_id: int):
    """(world_rng, rule_rng) for one trial, independent across trials and
    of execution order."""
    world = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial_id, 0)))
    rule = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial_id, 1)))
    return world, rule


def run_trajectory(
    cfg: ExperimentConfig,
    rule: StoppingRule | None = None,
    master_seed: int | None = None,
    trial_id: int = 0,
) -> TrialRecord:
    """Run a single trial to its stopping time (or t_max)."""
    rule = rule if rule is not None else cfg.rule
    master_seed = cfg.master_seed if master_seed is None else master_seed
    world_rng, rule_rng = trial_streams(master_seed, trial_id)

    window = get_window(cfg.dimension, cfg.window_radius())
    state = uniform_prior(window, cfg.radius, accelerated=cfg.accelerated)
    src_idx = int(world_rng.integers(state.n))
    source = tuple(int(c) for c in state.support[src_idx])
    world = WorldState(source=source, window=window)

    variance_traj = [state.variance()]
    log_z_traj = [state.log_normalizer()]
    diagnostics: list[dict] = []
    stop_time = cfg.t_max
    truncated = True

    for s in range(cfg.t_max + 1):
        frame = next_frame(world, cfg.channel, world_rng)
        if cfg.frame_dump:
            _export_frame(cfg, trial_id, frame)
        state = update(state, frame, cfg.channel)
        variance_traj.append(state.variance())
        log_z_traj.append(state.log_normalizer())
        if cfg.snapshot_export:
            _export_snapshot(cfg, trial_id, state)

        if rule.kind == "t_plus":
            triggered = t_plus_triggered(state, s)
        elif rule.kind == "fixed_horizon":
            triggered = s >= rule.horizon
        else:
            triggered, est = t_r_triggered(state, s, rule, cfg.channel, rule_rng)
            if est is not None:
                diagnostics.append(
                    {"s": s, "value": est.value, "std_error": est.std_error,
                     "rollouts": est.rollouts_used}
                )
        if triggered:
            stop_time = s
            truncated = False
            break

    err = state.mean() - np.asarray(source, float)
    squared_error = float(err @ err)
    cost = ball_size(cfg.dimension, stop_time)
    return TrialRecord(
        trial_id=trial_id,
        source=source,
        stop_time=stop_time,
        squared_error=squared_error,
        infection_cost=cost,
        total_loss=squared_error + cost,
        variance_trajectory=variance_traj,
        log_z_trajectory=log_z_traj,
        truncated=truncated,
        rule_diagnostics=diagnostics,
    )


def _export_snapshot(cfg: ExperimentConfig, trial_id: int, state: PosteriorState) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"trial_{trial_id:05d}_posterior_t{state.time:03d}.csv"
    probs = state.probabilities()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(state.d)] + ["prob"])
        for coords, p in zip(state.support, probs):
            writer.writerow([*map(int, coords), repr(float(p))])


def _export_frame(cfg: ExperimentConfig, trial_id: int, frame) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"trial_{trial_id:05d}_frame_t{frame.time:03d}.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(frame.window.d)] + ["value"])
        for coords, v in zip(frame.window.coords, frame.values):
            writer.writerow([*map(int, coords), repr(float(v))])


def _run_trial_worker(args) -> TrialRecord:
    cfg, trial_id = args
    return run_trajectory(cfg, trial_id=trial_id)


def run_batch(cfg: ExperimentConfig, master_seed: int | None = None) -> list[TrialRecord]:
    """Run cfg.trials independent trials; output is invariant to the
    worker count."""
    if master_seed is not None and master_seed != cfg.master_seed:
        from dataclasses import replace

        cfg = replace(cfg, master_seed=master_seed)
    ids = range(cfg.trials)
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_trial_worker, [(cfg, i) for i in ids], chunksize=8))
    else:
        records = [run_trajectory(cfg, trial_id=i) for i in ids]
    records.sort(key=lambda r: r.trial_id)
    return records


def batch_summary(records: list[TrialRecord]) -> dict:
    """Order-independent aggregates of a batch."""
    if not records:
        return {"trials": 0, "mean_stop_time": float("nan"),
                "mean_squared_error": float("nan"), "mean_loss": float("nan"),
                "truncation_rate": float("nan")}
    T = np.array([r.stop_time for r in records], float)
    err = np.array([r.squared_error for r in records])
    loss = np.array([r.total_loss for r in records])
    trunc = np.array([r.truncated for r in records])
    return {
        "trials": len(records),
        "mean_stop_time": float(T.mean()),
        "mean_squared_error": float(err.mean()),
        "mean_loss": float(loss.mean()),
        "truncation_rate": float(trunc.mean()),
    }


# -- scaling study -----------------------------------------------------


@dataclass
class ScalingRow:
    """One prior-size point of a stop-time scaling study."""

    n: int
    k: int
    trials: int
    mean_T: float
    q10: float
    q50: float
    q90: float
    mean_loss: float
    predicted_scale: float  # (log n)^(1/(d+1))
    ratio: float  # mean_T / predicted_scale


def scaling_study(
    d: int,
    k_grid,
    channel: ChannelPair,
    rule: StoppingRule,
    trials: int,
    master_seed: int,
    t_max: int | None = None,
    accelerated: bool = True,
    workers: int = 1,
) -> list[ScalingRow]:
    """Stop-time statistics across a grid of prior radii."""
    k_grid = list(k_grid)
    if any(b <= a for a, b in zip(k_grid, k_grid[1:])):
        raise ValueError("k_grid must be strictly increasing")
    rows = []
    for k in k_grid:
        n = ball_size(d, k)
        cfg = ExperimentConfig(
            dimension=d,
            radius=k,
            trials=trials,
            master_seed=master_seed,
            channel=channel,
            rule=rule,
            t_max=t_max if t_max is not None else default_t_max(d, n),
            accelerated=accelerated,
            workers=workers,
        )
        records = run_batch(cfg)
        T = np.array([r.stop_time for r in records], float)
        loss = np.array([r.total_loss for r in records])
        predicted = math.log(n) ** (1.0 / (d + 1))
        rows.append(
            ScalingRow(
                n=n,
                k=k,
                trials=trials,
                mean_T=float(T.mean()),
                q10=float(np.quantile(T, 0.1)),
                q50=float(np.quantile(T, 0.5)),
                q90=float(np.quantile(T, 0.9)),
                mean_loss=float(loss.mean()),
                predicted_scale=predicted,
                ratio=float(T.mean() / predicted),
            )
        )
    return rows


# -- variance transition profile --------------------------------------


def variance_transition_profile(
    cfg: ExperimentConfig, trials: int | None = None, master_seed: int | None = None
) -> list[dict]:
    """Per-time mean/quantiles of the posterior variance across trials.

    Requires a fixed-horizon rule so every trajectory covers the full
    horizon. Row t counts absorbed frames: row 0 is the prior variance,
    row t the variance after frames y(0)..y(t-1).
    """
    if cfg.rule.kind != "fixed_horizon":
        raise ValueError("variance_transition_profile requires a fixed_horizon rule")
    from dataclasses import replace

    if trials is not None:
        cfg = replace(cfg, trials=trials)
    if master_seed is not None:
        cfg = replace(cfg, master_seed=master_seed)
    records = run_batch(cfg)
    if not records:
        return []
    traj = np.array([r.variance_trajectory for r in records])  # (trials, horizon + 2)
    rows = []
    for idx in range(traj.shape[1]):
        col = traj[:, idx]
        rows.append(
            {
                "t": idx,
                "mean": float(col.mean()),
                "q10": float(np.quantile(col, 0.1)),
                "q50": float(np.quantile(col, 0.5)),
                "q90": float(np.quantile(col, 0.9)),
            }
        )
    return rows


# -- normalizer concentration -----------------------------------------


def normalizer_concentration_check(
    cfg: ExperimentConfig,
    eps: float | None = None,
    trials: int | None = None,
    master_seed: int | None = None,
    horizon: int | None = None,
) -> dict:
    """Empirical exceedance frequency of |Z(t) - n| > eps * n per time
    step, against the Chebyshev-style bound 4 / (sqrt(n) eps^2).

    The bound only applies at small t; larger t are still reported with
    ``bound_applies`` false.
    """
    from dataclasses import replace

    from .lattice import growth_inverse

    eps = cfg.eps if eps is None else eps
    n = cfg.n
    if eps < 1.0 / math.sqrt(n):
        raise ValueError(f"eps must be >= n^-1/2 = {1.0 / math.sqrt(n):.4g}, got {eps}")
    small_t = growth_inverse(cfg.dimension, 0.1 * math.log(n))
    if horizon is None:
        horizon = cfg.rule.horizon if cfg.rule.kind == "fixed_horizon" else small_t
    cfg = replace(cfg, rule=StoppingRule(kind="fixed_horizon", horizon=horizon))
    if trials is not None:
        cfg = replace(cfg, trials=trials)
    if master_seed is not None:
        cfg = replace(cfg, master_seed=master_seed)
    records = run_batch(cfg)
    bound = 4.0 / (math.sqrt(n) * eps * eps)
    rows = []
    for t in range(horizon + 1):
        z = np.array([math.exp(r.log_z_trajectory[t + 1]) for r in records])
        exceed = float(np.mean(np.abs(z - n) > eps * n))
        rows.append(
            {"t": t, "exceedance": exceed, "bound": bound, "bound_applies": t <= small_t}
        )
    return {"n": n, "eps": eps, "trials": len(records), "bound": bound, "rows": rows}
