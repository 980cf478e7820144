"""Sequential Bayes filter over the prior support.

Log-weights ``log_w[u]`` accumulate, per absorbed frame at time t, the sum
of log-likelihood ratios over the radius-t neighborhood of each candidate
u. Everything stays in log space: the unnormalized weights grow doubly
exponentially in the growth function and overflow immediately otherwise.

Neighborhood sums come in two flavors: a generic offset-gather over a
dense grid (any dimension), and accelerated prefix-sum paths for d = 1
(running cumulative sum) and d = 2 (L1 balls become axis-aligned squares
under the rotation (x, y) -> (x + y, x - y)). The accelerated paths agree
with the generic one to ~1e-10 and are used by default for d <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp, softmax

from .cascade import ObservationFrame, Window
from .channels import ChannelPair
from .lattice import Vertex, enumerate_ball


@lru_cache(maxsize=64)
def _ball_offset_deltas(d: int, t: int, grid_shape: tuple[int, ...]) -> np.ndarray:
    """Flat-index increments of the radius-t ball offsets in a dense grid."""
    offsets = np.asarray(enumerate_ball((0,) * d, t), dtype=np.int64)
    strides = np.empty(d, dtype=np.int64)
    strides[-1] = 1
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * grid_shape[i + 1]
    return offsets @ strides


def _ball_sums_generic(window: Window, llr: np.ndarray, support: np.ndarray, t: int) -> np.ndarray:
    grid = window.scatter(llr).ravel()
    shifted = support + window.radius
    strides = np.empty(window.d, dtype=np.int64)
    strides[-1] = 1
    for i in range(window.d - 2, -1, -1):
        strides[i] = strides[i + 1] * window.grid_shape[i + 1]
    base = shifted @ strides
    deltas = _ball_offset_deltas(window.d, t, window.grid_shape)
    acc = np.zeros(support.shape[0])
    for delta in deltas:
        acc += grid[base + delta]
    return acc


def _ball_sums_1d(window: Window, llr: np.ndarray, support: np.ndarray, t: int) -> np.ndarray:
    # Window coords are the full interval [-R, R] in order, so llr is
    # already a dense line.
    csum = np.concatenate(([0.0], np.cumsum(llr)))
    x = support[:, 0] + window.radius
    return csum[x + t + 1] - csum[x - t]


def _ball_sums_2d(window: Window, llr: np.ndarray, support: np.ndarray, t: int) -> np.ndarray:
    R = window.radius
    side = 2 * R + 1
    rot = np.zeros((side, side))
    a = window.coords[:, 0] + window.coords[:, 1] + R
    b = window.coords[:, 0] - window.coords[:, 1] + R
    rot[a, b] = llr
    # Padded inclusive 2D prefix sum.
    S = np.zeros((side + 1, side + 1))
    np.cumsum(np.cumsum(rot, axis=0), axis=1, out=S[1:, 1:])
    sa = support[:, 0] + support[:, 1] + R
    sb = support[:, 0] - support[:, 1] + R
    a0, a1 = sa - t, sa + t
    b0, b1 = sb - t, sb + t
    return S[a1 + 1, b1 + 1] - S[a0, b1 + 1] - S[a1 + 1, b0] + S[a0, b0]


def _ball_sums(window: Window, llr: np.ndarray, support: np.ndarray, t: int, accelerated: bool) -> np.ndarray:
    if accelerated and window.d == 1:
        return _ball_sums_1d(window, llr, support, t)
    if accelerated and window.d == 2:
        return _ball_sums_2d(window, llr, support, t)
    return _ball_sums_generic(window, llr, support, t)


@dataclass
class PosteriorState:
    """Posterior over the prior support at one point in time.

    ``time`` is the index of the last absorbed frame; -1 means prior only.
    Treat instances as immutable: :func:`update` returns a fresh state.
    """

    support: np.ndarray  # (n, d) int64, lexicographic order
    log_weights: np.ndarray  # (n,)
    time: int
    window: Window
    accelerated: bool = True
    _probs: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.support.shape[0]

    @property
    def d(self) -> int:
        return self.support.shape[1]

    def probabilities(self) -> np.ndarray:
        if self._probs is None:
            self._probs = softmax(self.log_weights)
        return self._probs

    def mean(self) -> np.ndarray:
        """Conditional-mean source estimate (posterior expectation of the
        source coordinates)."""
        return self.probabilities() @ self.support

    def variance(self) -> float:
        """Posterior expected squared distance to the conditional mean
        (trace of the posterior covariance)."""
        p = self.probabilities()
        centered = self.support - self.mean()
        return float(p @ (centered * centered).sum(axis=1))

    def map_estimate(self) -> Vertex:
        """Highest-probability vertex; ties break lexicographically
        (argmax returns the first of equal weights, and the support is in
        lexicographic order)."""
        return tuple(int(c) for c in self.support[int(np.argmax(self.log_weights))])

    def log_normalizer(self) -> float:
        return float(logsumexp(self.log_weights))


def uniform_prior(window: Window, k: int, accelerated: bool = True, center=None) -> PosteriorState:
    """Uniform prior over the radius-k ball around ``center`` (origin by
    default)."""
    if center is None:
        center = (0,) * window.d
    support = np.asarray(enumerate_ball(tuple(center), k), dtype=np.int64)
    return PosteriorState(
        support=support,
        log_weights=np.zeros(support.shape[0]),
        time=-1,
        window=window,
        accelerated=accelerated,
    )


def update(state: PosteriorState, frame: ObservationFrame, ch: ChannelPair) -> PosteriorState:
    """Absorb one frame: add each candidate's neighborhood LLR sum to its
    log-weight. Returns a new state; the input is untouched."""
    if frame.time != state.time + 1:
        raise ValueError(f"out-of-order frame: expected time {state.time + 1}, got {frame.time}")
    reach = int(np.abs(state.support).sum(axis=1).max()) + frame.time
    if reach > state.window.radius:
        raise ValueError(
            f"window radius {state.window.radius} does not cover candidate "
            f"neighborhoods at time {frame.time} (need {reach})"
        )
    llr = np.asarray(ch.llr(frame.values), dtype=float)
    sums = _ball_sums(state.window, llr, state.support, frame.time, state.accelerated)
    return replace(
        state,
        log_weights=state.log_weights + sums,
        time=frame.time,
        _probs=None,
    )


def sample_from_posterior(state: PosteriorState, rng: np.random.Generator) -> int:
    """Index of a support vertex drawn from the current posterior."""
    p = state.probabilities()
    return int(rng.choice(state.n, p=p / p.sum()))
