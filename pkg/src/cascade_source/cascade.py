"""Ground-truth world model: deterministic cascade spread from a hidden
source, and generation of the noisy signal field over a finite simulation
window.

The window is the L1 ball of radius (prior radius + t_max) around the
prior center. Signals outside it cancel in the posterior (they contribute
identical pre-infection factors to every hypothesis), so truncating to
the window is lossless for t <= t_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channels import ChannelPair
from .lattice import Vertex, ball_size, enumerate_ball


class Window:
    """The simulation region: an L1 ball around the origin with dense-grid
    indexing helpers.

    ``coords`` lists the window vertices in lexicographic order; the dense
    grid is the bounding box [-radius, radius]^d with window vertices
    scattered into it (cells outside the ball stay zero).
    """

    def __init__(self, d: int, radius: int):
        self.d = d
        self.radius = radius
        self.coords = np.asarray(enumerate_ball((0,) * d, radius), dtype=np.int64)
        self.size = self.coords.shape[0]
        self.grid_shape = (2 * radius + 1,) * d
        # Flat index of each window vertex within the dense grid.
        shifted = self.coords + radius
        self.grid_index = np.ravel_multi_index(tuple(shifted.T), self.grid_shape)

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Place per-vertex values into the dense grid (zeros elsewhere)."""
        grid = np.zeros(self.grid_shape, dtype=float)
        grid.ravel()[self.grid_index] = values
        return grid

    def distances_to(self, vertex) -> np.ndarray:
        """L1 distance from every window vertex to ``vertex``."""
        v = np.asarray(vertex, dtype=np.int64)
        return np.abs(self.coords - v).sum(axis=1)


@lru_cache(maxsize=8)
def get_window(d: int, radius: int) -> Window:
    """Cached window factory; windows are immutable once built."""
    return Window(d, radius)


@dataclass
class ObservationFrame:
    """The signal field at one time step: one value per window vertex,
    aligned with ``window.coords``."""

    time: int
    values: np.ndarray
    window: Window


def infected_set(source, t: int) -> set[Vertex]:
    """Vertices affected by the cascade at time t: the radius-t ball
    around the source."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return set(enumerate_ball(tuple(source), t))


@dataclass
class WorldState:
    """Single-trial world: hidden source, current time, and the window.

    ``time`` is the index of the next frame to emit; frame 0 exists.
    """

    source: Vertex
    window: Window
    time: int = 0
    _source_dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._source_dist = self.window.distances_to(self.source)

    def infected_mask(self) -> np.ndarray:
        return self._source_dist <= self.time


def next_frame(world: WorldState, ch: ChannelPair, rng: np.random.Generator) -> ObservationFrame:
    """Emit the signal field at the world's current time, then advance it."""
    mask = world.infected_mask()
    values = ch.sample_field(mask, rng)
    frame = ObservationFrame(time=world.time, values=values, window=world.window)
    world.time += 1
    return frame


def infection_cost(d: int, t: int) -> int:
    """Number of affected vertices at stop time t, counted on the infinite
    lattice (vertex-transitive ball count, never window-clipped)."""
    return ball_size(d, t)
