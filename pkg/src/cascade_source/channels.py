"""Per-vertex signal model: a pair of distributions (pre-infection Q0,
post-infection Q1) with sampling, log-likelihood ratios and closed-form
moment constants.

Two families are supported:

* ``gaussian``: unit-variance Gaussian with mean 0 under Q0 and mean
  ``mu`` under Q1. General variances reduce to this by rescaling mu.
* ``discrete``: finite alphabet with strictly positive probability
  vectors q0, q1 (mutual absolute continuity for free).

All likelihood arithmetic downstream is done in log space; this module
never materializes raw likelihood ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChannelMoments:
    """Closed-form moment constants of a channel pair.

    alpha  = E_{Q1}[dQ1/dQ0]        (equals lambda0 by change of measure)
    lambda0 = E_{Q0}[(dQ1/dQ0)^2]
    lambda1 = E_{Q1}[(dQ1/dQ0)^2]
    kl01 = D(Q0 || Q1), kl10 = D(Q1 || Q0), d_mean = (kl01 + kl10) / 2
    """

    alpha: float
    lambda0: float
    lambda1: float
    kl01: float
    kl10: float
    d_mean: float

    @property
    def lam(self) -> float:
        """Covariance growth base lambda0 * lambda1."""
        return self.lambda0 * self.lambda1


@dataclass(frozen=True)
class ChannelPair:
    """A (Q0, Q1) signal channel.

    Q0 and Q1 must differ unless ``allow_equal`` is set; the equal-channel
    test mode makes every signal uninformative and is used to exercise
    degenerate behavior in tests.
    """

    kind: str  # "gaussian" | "discrete"
    mu: float = 0.0
    q0: tuple[float, ...] = field(default=())
    q1: tuple[float, ...] = field(default=())
    allow_equal: bool = False

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.mu < 0:
                raise ValueError(f"gaussian mean shift must be >= 0, got {self.mu}")
            if self.mu == 0 and not self.allow_equal:
                raise ValueError("gaussian mu=0 makes Q0 == Q1; set allow_equal for test mode")
        elif self.kind == "discrete":
            q0, q1 = np.asarray(self.q0, float), np.asarray(self.q1, float)
            if q0.size < 2 or q0.shape != q1.shape:
                raise ValueError("discrete channel needs matching q0/q1 of length >= 2")
            if np.any(q0 <= 0) or np.any(q1 <= 0):
                raise ValueError(
                    "discrete probabilities must be strictly positive "
                    "(mutual absolute continuity)"
                )
            if abs(q0.sum() - 1) > 1e-9 or abs(q1.sum() - 1) > 1e-9:
                raise ValueError("discrete probability vectors must sum to 1")
            if np.allclose(q0, q1) and not self.allow_equal:
                raise ValueError("q0 == q1; set allow_equal for test mode")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def gaussian(cls, mu: float, allow_equal: bool = False) -> "ChannelPair":
        return cls(kind="gaussian", mu=mu, allow_equal=allow_equal)

    @classmethod
    def discrete(cls, q0, q1, allow_equal: bool = False) -> "ChannelPair":
        return cls(kind="discrete", q0=tuple(q0), q1=tuple(q1), allow_equal=allow_equal)

    @property
    def is_degenerate(self) -> bool:
        """True in the equal-channel test mode (Q0 == Q1)."""
        if self.kind == "gaussian":
            return self.mu == 0
        return bool(np.allclose(self.q0, self.q1))

    # -- sampling -----------------------------------------------------

    def sample(self, infected: bool, rng: np.random.Generator, size=None):
        """Draw from Q1 if infected else Q0."""
        if self.kind == "gaussian":
            return rng.normal(self.mu if infected else 0.0, 1.0, size=size)
        probs = self.q1 if infected else self.q0
        return rng.choice(len(probs), size=size, p=probs)

    def sample_field(self, infected: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One draw per entry of the boolean mask ``infected``.

        Draw order is fixed by array layout so results are reproducible
        regardless of how many entries are infected.
        """
        infected = np.asarray(infected, bool)
        if self.kind == "gaussian":
            return rng.standard_normal(infected.shape) + self.mu * infected
        m = len(self.q0)
        base = rng.choice(m, size=infected.shape, p=np.asarray(self.q0))
        anom = rng.choice(m, size=infected.shape, p=np.asarray(self.q1))
        return np.where(infected, anom, base)

    # -- likelihood ---------------------------------------------------

    def llr(self, y):
        """Pointwise log(dQ1/dQ0)(y); vectorized over arrays."""
        if self.kind == "gaussian":
            return self.mu * np.asarray(y, float) - 0.5 * self.mu**2
        y = np.asarray(y)
        if np.any(y < 0) or np.any(y >= len(self.q0)):
            raise ValueError("discrete symbol outside alphabet")
        table = np.log(np.asarray(self.q1)) - np.log(np.asarray(self.q0))
        return table[y]

    # -- moments ------------------------------------------------------

    def moments(self) -> ChannelMoments:
        if self.kind == "gaussian":
            m2 = self.mu**2
            return ChannelMoments(
                alpha=math.exp(m2),
                lambda0=math.exp(m2),
                lambda1=math.exp(3 * m2),
                kl01=m2 / 2,
                kl10=m2 / 2,
                d_mean=m2 / 2,
            )
        q0, q1 = np.asarray(self.q0, float), np.asarray(self.q1, float)
        alpha = float(np.sum(q1**2 / q0))
        lambda1 = float(np.sum(q1**3 / q0**2))
        kl01 = float(np.sum(q0 * np.log(q0 / q1)))
        kl10 = float(np.sum(q1 * np.log(q1 / q0)))
        return ChannelMoments(
            alpha=alpha,
            lambda0=alpha,
            lambda1=lambda1,
            kl01=kl01,
            kl10=kl10,
            d_mean=(kl01 + kl10) / 2,
        )
