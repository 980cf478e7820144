"""Exact geometry and combinatorics of the d-dimensional integer lattice
under the L1 metric.

Everything here is a pure function of its integer arguments. Sphere and
ball counts use closed-form binomial identities; a from-scratch BFS
enumeration is provided separately (`bfs_sphere_sizes`) so the closed
forms can be cross-checked.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, Sequence

Vertex = tuple[int, ...]


def _check_dt(d: int, t: int) -> None:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if t < 0:
        raise ValueError(f"radius must be >= 0, got {t}")


def l1_distance(u: Sequence[int], v: Sequence[int]) -> int:
    """L1 (taxicab) distance between two lattice vertices."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum(abs(a - b) for a, b in zip(u, v))


@lru_cache(maxsize=None)
def sphere_size(d: int, t: int) -> int:
    """Number of lattice points at L1 distance exactly t from a vertex.

    Uses the signed-composition identity sum_k 2^k C(d,k) C(t-1,k-1):
    choose k nonzero coordinates, a sign for each, and a composition of t
    into k positive parts.
    """
    _check_dt(d, t)
    if t == 0:
        return 1
    return sum(
        (1 << k) * math.comb(d, k) * math.comb(t - 1, k - 1)
        for k in range(1, min(d, t) + 1)
    )


# Cumulative count caches, one growing list per dimension.
_BALL: dict[int, list[int]] = {}
_GROWTH: dict[int, list[int]] = {}


def ball_size(d: int, t: int) -> int:
    """Number of lattice points at L1 distance <= t from a vertex."""
    _check_dt(d, t)
    cum = _BALL.setdefault(d, [1])
    while len(cum) <= t:
        cum.append(cum[-1] + sphere_size(d, len(cum)))
    return cum[t]


def growth(d: int, t: int) -> int:
    """Neighborhood growth function: sum of ball sizes for radii 0..t.

    On the d-lattice this grows like t^(d+1); it measures the cumulative
    number of signals collected from a candidate's neighborhood.
    """
    _check_dt(d, t)
    cum = _GROWTH.setdefault(d, [1])
    while len(cum) <= t:
        cum.append(cum[-1] + ball_size(d, len(cum)))
    return cum[t]


def growth_inverse(d: int, z: float) -> int:
    """Integer pseudo-inverse of the growth function: min{t >= 0 : growth(d,t) >= z}."""
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    t = 0
    while growth(d, t) < z:
        t += 1
    return t


def enumerate_ball(center: Sequence[int], t: int) -> list[Vertex]:
    """All vertices at L1 distance <= t from center, in lexicographic order."""
    if t < 0:
        raise ValueError(f"radius must be >= 0, got {t}")
    center = tuple(center)

    def rec(prefix: list[int], i: int, budget: int) -> Iterator[Vertex]:
        if i == len(center) - 1:
            c = center[i]
            for x in range(c - budget, c + budget + 1):
                yield tuple(prefix) + (x,)
            return
        c = center[i]
        for x in range(c - budget, c + budget + 1):
            prefix.append(x)
            yield from rec(prefix, i + 1, budget - abs(x - c))
            prefix.pop()

    return list(rec([], 0, t))


def overlap_growth(u: Sequence[int], v: Sequence[int], t: int) -> int:
    """Sum over s = 0..t of the size of the intersection of the radius-s
    balls around u and v.

    Zero iff the balls never meet (distance > 2t); equals growth(d, t)
    when u == v.
    """
    if t < 0:
        raise ValueError(f"radius must be >= 0, got {t}")
    u, v = tuple(u), tuple(v)
    d = len(u)
    if l1_distance(u, v) > 2 * t:
        return 0
    if u == v:
        return growth(d, t)
    # w lies in both radius-s balls iff max(d(w,u), d(w,v)) <= s, so w
    # contributes one unit for each s in [max-dist, t].
    total = 0
    for w in enumerate_ball(u, t):
        m = max(l1_distance(w, u), l1_distance(w, v))
        if m <= t:
            total += t - m + 1
    return total


def sphere_bounds(d: int, t: int) -> tuple[float, float]:
    """Closed-form lower/upper bounds on sphere_size(d, t).

    Valid for d >= 2 and t >= d, where the per-orthant binomial counting
    identities hold; refuses out-of-range arguments rather than
    extrapolating.
    """
    if d < 2:
        raise ValueError(f"sphere_bounds requires d >= 2, got d={d}")
    if t < d:
        raise ValueError(f"sphere_bounds requires t >= d, got t={t}, d={d}")
    scale = (2**d) / (d - 1) ** (d - 1)
    lower = scale * (t - 1) ** (d - 1)
    upper = scale * math.e ** (d - 1) * (t + d - 1) ** (d - 1)
    return lower, upper


@lru_cache(maxsize=None)
def _sphere_pnorm(d: int, s: int, p: float) -> float:
    """Sum of ||u||_2^p over the radius-s L1 sphere.

    Enumerates nonnegative compositions of s into d parts; each pattern
    stands for 2^(#nonzero) signed points with the same norm.
    """
    if s == 0:
        return 0.0
    terms: list[float] = []

    def rec(parts: list[int], i: int, rem: int) -> None:
        if i == d - 1:
            parts.append(rem)
            nnz = sum(1 for x in parts if x)
            sq = sum(x * x for x in parts)
            terms.append((1 << nnz) * sq ** (p / 2.0))
            parts.pop()
            return
        for x in range(rem + 1):
            parts.append(x)
            rec(parts, i + 1, rem - x)
            parts.pop()

    rec([], 0, s)
    return math.fsum(terms)


def pnorm_sum(r: int, p: float, d: int) -> float:
    """Exact sum of ||u||_2^p over the radius-r L1 ball around the origin."""
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    _check_dt(d, r)
    return math.fsum(_sphere_pnorm(d, s, p) for s in range(1, r + 1))


def bfs_sphere_sizes(d: int, t_max: int) -> list[int]:
    """Sphere sizes for radii 0..t_max via breadth-first search from the
    origin, one unit step per edge. Independent of the closed forms above;
    used as a verification oracle.
    """
    _check_dt(d, t_max)
    origin: Vertex = (0,) * d
    seen = {origin}
    frontier = [origin]
    sizes = [1]
    for _ in range(t_max):
        nxt = []
        for v in frontier:
            for i in range(d):
                for step in (-1, 1):
                    w = v[:i] + (v[i] + step,) + v[i + 1 :]
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
        frontier = nxt
        sizes.append(len(frontier))
    return sizes
