"""Stopping-rule bracket demo.

The variance-threshold rule T_plus and the Monte Carlo lookahead rule
T_r bracket the (uncomputable) Bayes-optimal stopping time from above
and below. This script runs both rules on identical world realizations
(paired seeds) and tabulates the stop times side by side.

Run:  python demos/stopping_bracket.py
"""

import math

from cascade_source import run_trajectory
from cascade_source.config import build_config
from cascade_source.lattice import ball_size, growth_inverse

PAIRS = 25
K = 30

n = ball_size(1, K)
r = growth_inverse(1, 6 * math.log(n))
base = dict(
    dimension=1,
    radius=K,
    trials=0,
    master_seed=11,
    channel=dict(kind="gaussian", mu=2.0),
)
cfg_r = build_config(dict(base, rule=dict(kind="t_r", r=r, rollouts=300)))
cfg_plus = build_config(dict(base, rule=dict(kind="t_plus")))

print(f"n = {n}, lookahead horizon r = {r}, {PAIRS} paired trials")
print()
print(f"{'trial':>5} {'source':>6} {'T_r':>4} {'T_plus':>6} {'ordered':>8}")
wins = 0
for i in range(PAIRS):
    lo = run_trajectory(cfg_r, trial_id=i)
    hi = run_trajectory(cfg_plus, trial_id=i)
    assert lo.source == hi.source, "paired seeds must share the world"
    ordered = lo.stop_time <= hi.stop_time
    wins += ordered
    print(
        f"{i:>5} {lo.source[0]:>6} {lo.stop_time:>4} {hi.stop_time:>6} "
        f"{'yes' if ordered else 'NO':>8}"
    )

print()
print(f"T_r <= T_plus in {wins}/{PAIRS} pairs")
