"""Stop-time scaling demo.

Under the variance-threshold rule the mean stop time grows like
(log n)^(1/(d+1)) in the prior support size n. This script sweeps a
grid of prior radii in d = 1 and prints the ratio of the observed mean
stop time to the predicted scale; an approximately flat ratio column is
the scaling law at work.

Run:  python demos/scaling_law.py
"""

from cascade_source import ChannelPair, StoppingRule, scaling_study

rows = scaling_study(
    d=1,
    k_grid=[50, 500, 5000],
    channel=ChannelPair.gaussian(2.0),
    rule=StoppingRule(kind="t_plus"),
    trials=100,
    master_seed=3,
)

print(f"{'n':>8} {'mean_T':>8} {'q50':>5} {'(log n)^(1/2)':>14} {'ratio':>7}")
for row in rows:
    print(
        f"{row.n:>8} {row.mean_T:>8.3f} {row.q50:>5.1f} "
        f"{row.predicted_scale:>14.3f} {row.ratio:>7.3f}"
    )

ratios = [r.ratio for r in rows]
print()
print(f"ratio band (max/min): {max(ratios) / min(ratios):.3f}")
