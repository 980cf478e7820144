"""Posterior filtering walkthrough.

A single 1d cascade is simulated from a hidden source, and the Bayes
posterior over candidate sources is updated one observation frame at a
time. Watch the conditional-mean estimate drift toward the true source
while the posterior variance collapses.

Run:  python demos/posterior_walkthrough.py
"""

import numpy as np

from cascade_source import (
    ChannelPair,
    WorldState,
    get_window,
    next_frame,
    uniform_prior,
    update,
)

K = 15        # prior radius: source is uniform on {-K, ..., K}
STEPS = 8     # frames to absorb
MU = 1.0      # gaussian mean shift of infected signals

rng = np.random.default_rng(2026)
channel = ChannelPair.gaussian(MU)
window = get_window(1, K + STEPS)

state = uniform_prior(window, K)
source = tuple(int(c) for c in state.support[rng.integers(state.n)])
world = WorldState(source=source, window=window)

print(f"hidden source: {source[0]}, prior variance: {state.variance():.2f}")
print()
print(f"{'t':>3} {'mean':>8} {'variance':>9} {'MAP':>5} {'log Z':>9}")
for _ in range(STEPS):
    frame = next_frame(world, channel, rng)
    state = update(state, frame, channel)
    m = state.mean()[0]
    mp = state.map_estimate()[0]
    print(
        f"{state.time:>3} {m:>8.3f} {state.variance():>9.4f} "
        f"{mp:>5} {state.log_normalizer():>9.3f}"
    )

err = (state.mean()[0] - source[0]) ** 2
print()
print(f"final squared error of the conditional mean: {err:.4f}")
