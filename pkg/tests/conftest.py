import numpy as np
import pytest

from cascade_source import (
    ChannelPair,
    ObservationFrame,
    WorldState,
    get_window,
    next_frame,
    uniform_prior,
    update,
)
from cascade_source.lattice import enumerate_ball, l1_distance


def batch_log_weights(frames, ch, support):
    """From-scratch evaluation of the unnormalized posterior log-weights:
    for each candidate u, sum the per-signal log-likelihood ratios over
    its radius-t neighborhood for every absorbed frame t. Deliberately
    slow and loop-based; the independent oracle for the recursion.
    """
    window = frames[0].window
    index = {tuple(c): i for i, c in enumerate(window.coords.tolist())}
    out = []
    for u in support:
        u = tuple(int(x) for x in u)
        total = 0.0
        for frame in frames:
            llr = np.asarray(ch.llr(frame.values), float)
            for w in enumerate_ball(u, frame.time):
                total += llr[index[w]]
        out.append(total)
    return np.array(out)


def run_frames(d, k, t_steps, ch, seed, source=None, accelerated=True, t_cap=None):
    """Drive a fresh world/posterior pair for t_steps frames; returns
    (state, frames, source). ``t_cap`` sizes the window for later
    lookahead past t_steps."""
    rng = np.random.default_rng(seed)
    window = get_window(d, k + max(t_steps, t_cap or 0))
    state = uniform_prior(window, k, accelerated=accelerated)
    if source is None:
        source = tuple(int(c) for c in state.support[rng.integers(state.n)])
    world = WorldState(source=source, window=window)
    frames = []
    for _ in range(t_steps):
        frame = next_frame(world, ch, rng)
        frames.append(frame)
        state = update(state, frame, ch)
    return state, frames, source


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
