"""Experiment configuration: loading, validation with field-level
messages, default filling, and a canonical hash for provenance.

Configs are TOML (or JSON; the echoed effective config is JSON and can be
re-run directly). Example::

    dimension = 1
    radius = 20
    trials = 50
    master_seed = 42

    [channel]
    kind = "gaussian"   # or "discrete" with q0 = [...], q1 = [...]
    mu = 2.0

    [rule]
    kind = "t_plus"     # or "t_r" / "fixed_horizon"
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .channels import ChannelPair
from .lattice import ball_size, growth_inverse
from .stopping import StoppingRule


class ConfigError(ValueError):
    """Validation failure; ``errors`` holds 'field.path: message' lines."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("invalid config:\n  " + "\n  ".join(errors))


@dataclass
class ExperimentConfig:
    dimension: int
    radius: int
    trials: int
    master_seed: int
    channel: ChannelPair
    rule: StoppingRule
    t_max: int
    accelerated: bool = True
    snapshot_export: bool = False
    frame_dump: bool = False
    workers: int = 1
    output_dir: str = "results"
    k_grid: tuple[int, ...] = ()  # scaling studies only
    eps: float = 0.5  # normalizer concentration check only

    @property
    def n(self) -> int:
        """Exact prior support size."""
        return ball_size(self.dimension, self.radius)

    def window_radius(self) -> int:
        return self.radius + self.t_max

    def effective_dict(self) -> dict:
        ch = self.channel
        channel = {"kind": ch.kind, "allow_equal": ch.allow_equal}
        if ch.kind == "gaussian":
            channel["mu"] = ch.mu
        else:
            channel["q0"] = list(ch.q0)
            channel["q1"] = list(ch.q1)
        rule = {"kind": self.rule.kind}
        if self.rule.kind == "t_r":
            rule.update(
                r=self.rule.r,
                rollouts=self.rule.rollouts,
                guard_z=self.rule.guard_z,
                estimator=self.rule.estimator,
            )
        elif self.rule.kind == "fixed_horizon":
            rule["horizon"] = self.rule.horizon
        return {
            "dimension": self.dimension,
            "radius": self.radius,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "t_max": self.t_max,
            "channel": channel,
            "rule": rule,
            "accelerated": self.accelerated,
            "snapshot_export": self.snapshot_export,
            "frame_dump": self.frame_dump,
            "workers": self.workers,
            "output_dir": self.output_dir,
            "k_grid": list(self.k_grid),
            "eps": self.eps,
        }

    def config_hash(self) -> str:
        """Hash of the experiment-defining fields. Execution-only knobs
        (output paths, worker count, debug dumps) are excluded: they never
        change results."""
        canon = self.effective_dict()
        for key in ("output_dir", "workers", "frame_dump", "snapshot_export"):
            canon.pop(key)
        return hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()[:16]


def default_t_max(d: int, n: int) -> int:
    """Generous termination horizon: four times the growth-inverse of
    10 log n. Trials that reach it are flagged truncated, never dropped."""
    return 4 * growth_inverse(d, 10.0 * math.log(max(n, 2)))


def default_lookahead_horizon(d: int, n: int, coeff: float = 6.0) -> int:
    """Default t_r horizon: growth-inverse of coeff * log n (at least 1)."""
    return max(1, growth_inverse(d, coeff * math.log(max(n, 2))))


def _expect(errors, cond, path, msg):
    if not cond:
        errors.append(f"{path}: {msg}")
    return cond


def build_config(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping and fill defaults."""
    errors: list[str] = []

    def get_int(path, default=None, minimum=None):
        parts = path.split(".")
        node = raw
        for p in parts[:-1]:
            node = node.get(p, {}) if isinstance(node, dict) else {}
        val = node.get(parts[-1], default) if isinstance(node, dict) else default
        if val is None:
            errors.append(f"{path}: required")
            return None
        if not isinstance(val, int) or isinstance(val, bool):
            errors.append(f"{path}: expected integer, got {val!r}")
            return None
        if minimum is not None and val < minimum:
            errors.append(f"{path}: must be >= {minimum}, got {val}")
            return None
        return val

    d = get_int("dimension", minimum=1)
    k = get_int("radius", minimum=0)
    trials = get_int("trials", minimum=0)
    seed = get_int("master_seed", default=0, minimum=0)
    workers = get_int("workers", default=1, minimum=1)

    # Channel block.
    ch_raw = raw.get("channel")
    channel = None
    if not _expect(errors, isinstance(ch_raw, dict), "channel", "required table"):
        pass
    else:
        kind = ch_raw.get("kind")
        allow_equal = bool(ch_raw.get("allow_equal", False))
        try:
            if kind == "gaussian":
                channel = ChannelPair.gaussian(float(ch_raw.get("mu", 0.0)), allow_equal)
            elif kind == "discrete":
                channel = ChannelPair.discrete(
                    ch_raw.get("q0", ()), ch_raw.get("q1", ()), allow_equal
                )
            else:
                errors.append(f"channel.kind: expected 'gaussian' or 'discrete', got {kind!r}")
        except (ValueError, TypeError) as exc:
            errors.append(f"channel: {exc}")

    if errors:
        raise ConfigError(errors)

    n = ball_size(d, k)
    t_max = get_int("t_max", default=default_t_max(d, n), minimum=0)

    # Rule block.
    rule_raw = raw.get("rule", {"kind": "t_plus"})
    rule = None
    if not isinstance(rule_raw, dict):
        errors.append("rule: expected table")
    else:
        kind = rule_raw.get("kind", "t_plus")
        try:
            if kind == "t_r":
                coeff = float(rule_raw.get("r_coeff", 6.0))
                rule = StoppingRule(
                    kind="t_r",
                    r=int(rule_raw.get("r", default_lookahead_horizon(d, n, coeff))),
                    rollouts=int(rule_raw.get("rollouts", 200)),
                    guard_z=float(rule_raw.get("guard_z", 0.0)),
                    estimator=rule_raw.get("estimator", "variance"),
                )
            elif kind == "fixed_horizon":
                rule = StoppingRule(kind="fixed_horizon", horizon=int(rule_raw.get("horizon", 0)))
            elif kind == "t_plus":
                rule = StoppingRule(kind="t_plus")
            else:
                errors.append(f"rule.kind: unknown rule {kind!r}")
        except (ValueError, TypeError) as exc:
            errors.append(f"rule: {exc}")

    k_grid = raw.get("k_grid", [])
    if not isinstance(k_grid, (list, tuple)) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in k_grid
    ):
        errors.append("k_grid: expected list of integers")
        k_grid = []
    elif any(b <= a for a, b in zip(k_grid, k_grid[1:])):
        errors.append("k_grid: must be strictly increasing")

    eps = raw.get("eps", 0.5)
    if not isinstance(eps, (int, float)) or eps <= 0:
        errors.append(f"eps: must be a positive number, got {eps!r}")

    if errors or t_max is None:
        raise ConfigError(errors or ["t_max: invalid"])

    return ExperimentConfig(
        dimension=d,
        radius=k,
        trials=trials,
        master_seed=seed,
        channel=channel,
        rule=rule,
        t_max=t_max,
        accelerated=bool(raw.get("accelerated", True)),
        snapshot_export=bool(raw.get("snapshot_export", False)),
        frame_dump=bool(raw.get("frame_dump", False)),
        workers=workers,
        output_dir=str(raw.get("output_dir", "results")),
        k_grid=tuple(k_grid),
        eps=float(eps),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a TOML or JSON config file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        raw = json.loads(text)
    else:
        import tomli

        raw = tomli.loads(text)
    return build_config(raw)
