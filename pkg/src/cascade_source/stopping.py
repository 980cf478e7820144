"""Stopping rules for the sequential localization problem.

* ``t_plus``: stop once the posterior variance drops to the current
  sphere size (an upper bracket of the optimal stopping time).
* ``t_r``: fixed-horizon Monte-Carlo lookahead -- stop once the expected
  information gain up to horizon r no longer pays for the added
  infections (a lower bracket).
* ``fixed_horizon``: stop at a preset time; used for trajectory studies.

The optimal stopping time itself involves a supremum over all stopping
times and is not computed; the [t_r, t_plus] bracket is the operational
surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelPair
from .lattice import ball_size, sphere_size
from .posterior import PosteriorState, sample_from_posterior, update
from .cascade import ObservationFrame


@dataclass(frozen=True)
class StoppingRule:
    """Rule selector plus parameters.

    For ``t_r``: ``r`` is the lookahead horizon, ``rollouts`` the Monte
    Carlo sample count, ``guard_z`` an optional one-sided guard (trigger
    only if estimate + guard_z * SE <= 0; 0 = faithful point-estimate
    trigger), ``estimator`` one of "variance" (variance difference) or
    "mean_shift" (squared estimator displacement).
    """

    kind: str  # "t_plus" | "t_r" | "fixed_horizon"
    r: int = 0
    rollouts: int = 200
    guard_z: float = 0.0
    estimator: str = "variance"
    horizon: int = 0

    def __post_init__(self):
        if self.kind not in ("t_plus", "t_r", "fixed_horizon"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "t_r":
            if self.r < 1:
                raise ValueError(f"t_r horizon must be >= 1, got {self.r}")
            if self.rollouts < 1:
                raise ValueError(f"rollouts must be >= 1, got {self.rollouts}")
        if self.estimator not in ("variance", "mean_shift"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.kind == "fixed_horizon" and self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")


@dataclass(frozen=True)
class LookaheadEstimate:
    """Monte-Carlo estimate of the expected gain-minus-cost at the
    lookahead horizon, given the current posterior."""

    value: float
    std_error: float
    rollouts_used: int


def t_plus_triggered(state: PosteriorState, s: int) -> bool:
    """True once the posterior variance is at most the radius-s sphere
    size."""
    if state.time != s:
        raise ValueError(f"state at time {state.time}, rule evaluated at {s}")
    return state.variance() <= sphere_size(state.d, s)


def lookahead_estimate(
    state: PosteriorState,
    s: int,
    r: int,
    M: int,
    ch: ChannelPair,
    rng: np.random.Generator,
    estimator: str = "variance",
) -> LookaheadEstimate:
    """Estimate the expected gain-minus-cost of continuing from time s to
    the fixed horizon r.

    Each rollout draws a hypothetical source from the current posterior
    (the conditional source law given the data so far), simulates frames
    s+1..r, and pushes a cloned posterior forward. The information gain is
    measured either as the variance drop ("variance", default) or the
    squared displacement of the conditional mean ("mean_shift"); the two
    agree in expectation by orthogonality of the estimator's martingale
    increments. The deterministic infection cost ball(r) - ball(s) is
    subtracted once.
    """
    if r < s:
        raise ValueError(f"lookahead horizon r={r} must be >= s={s}")
    if state.time != s:
        raise ValueError(f"state at time {state.time}, lookahead evaluated at {s}")
    d = state.d
    cost = ball_size(d, r) - ball_size(d, s)
    if r == s:
        return LookaheadEstimate(value=0.0, std_error=0.0, rollouts_used=0)

    window = state.window
    base_mean = state.mean()
    base_var = state.variance()
    gains = np.empty(M)
    streams = rng.spawn(M)
    for i, sub in enumerate(streams):
        src = state.support[sample_from_posterior(state, sub)]
        dist = window.distances_to(src)
        clone = state
        for step in range(s + 1, r + 1):
            values = ch.sample_field(dist <= step, sub)
            frame = ObservationFrame(time=step, values=values, window=window)
            clone = update(clone, frame, ch)
        if estimator == "variance":
            gains[i] = base_var - clone.variance()
        else:
            diff = clone.mean() - base_mean
            gains[i] = float(diff @ diff)
    value = float(gains.mean() - cost)
    se = float(gains.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    return LookaheadEstimate(value=value, std_error=se, rollouts_used=M)


def t_r_triggered(
    state: PosteriorState,
    s: int,
    rule: StoppingRule,
    ch: ChannelPair,
    rng: np.random.Generator,
) -> tuple[bool, LookaheadEstimate | None]:
    """Lookahead trigger. At s >= r the rule fires unconditionally (the
    gain-minus-cost at the horizon itself is exactly zero)."""
    if s >= rule.r:
        return True, None
    est = lookahead_estimate(state, s, rule.r, rule.rollouts, ch, rng, rule.estimator)
    return est.value + rule.guard_z * est.std_error <= 0, est
