"""Sufficient statistics of the observation stream and the GLLR statistic.

For a single-parameter exponential family the entire observable state is the
per-arm pull count and reward sum; empirical means are maintained alongside.
The generalized log-likelihood ratio between two arms has a closed form built
from the family KL divergence evaluated at the pooled empirical mean, so no
reward history is ever stored.
"""

from __future__ import annotations

import math

from .families import GaussianKnownVariance, RewardFamily


class UnpulledArmError(ValueError):
    """A statistic was requested for an arm with zero pulls."""


class SufficientStats:
    """Per-arm pull counts and reward sums; one owner per trial.

    ``means[i]`` is maintained incrementally and is meaningful only once
    ``counts[i] >= 1``. The round counter ``n`` always equals the total
    number of recorded pulls.
    """

    __slots__ = ("n_arms", "counts", "sums", "means", "n")

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError(f"need at least one arm, got {n_arms}")
        self.n_arms = n_arms
        self.counts = [0] * n_arms
        self.sums = [0.0] * n_arms
        self.means = [math.nan] * n_arms
        self.n = 0

    def update(self, arm: int, reward: float) -> None:
        """Record one pull of ``arm`` with the observed ``reward``."""
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm {arm} out of range [0, {self.n_arms})")
        c = self.counts[arm] + 1
        s = self.sums[arm] + reward
        self.counts[arm] = c
        self.sums[arm] = s
        self.means[arm] = s / c
        self.n += 1

    def mean(self, arm: int) -> float:
        if self.counts[arm] < 1:
            raise UnpulledArmError(f"arm {arm} has no pulls")
        return self.means[arm]

    def min_count(self) -> int:
        return min(self.counts)

    def copy(self) -> "SufficientStats":
        out = SufficientStats(self.n_arms)
        out.counts = list(self.counts)
        out.sums = list(self.sums)
        out.means = list(self.means)
        out.n = self.n
        return out

    def __repr__(self) -> str:
        return f"SufficientStats(n={self.n}, counts={self.counts})"


def weighted_mean(stats: SufficientStats, i: int, j: int) -> float:
    """Pull-count-weighted average of the empirical means of arms i and j."""
    ti = stats.counts[i]
    tj = stats.counts[j]
    if ti < 1 or tj < 1:
        raise UnpulledArmError(f"arms {i}, {j} must both have pulls")
    if i == j:
        return stats.means[i]
    return (stats.sums[i] + stats.sums[j]) / (ti + tj)


def gllr(family: RewardFamily, stats: SufficientStats, i: int, j: int) -> float:
    """Generalized log-likelihood ratio that arm i beats arm j.

    Zero whenever the empirical mean of i does not exceed that of j (strict
    indicator); otherwise the count-weighted sum of KL divergences from each
    empirical mean to the pooled mean. May be ``math.inf`` when an empirical
    mean sits on a boundary where the family becomes singular.
    """
    if i == j:
        raise ValueError("gllr requires two distinct arms")
    ti = stats.counts[i]
    tj = stats.counts[j]
    if ti < 1 or tj < 1:
        raise UnpulledArmError(f"arms {i}, {j} must both have pulls")
    mi = stats.means[i]
    mj = stats.means[j]
    if mi <= mj:
        return 0.0
    pooled = (stats.sums[i] + stats.sums[j]) / (ti + tj)
    return ti * family.kl(mi, pooled) + tj * family.kl(mj, pooled)


def gllr_gaussian(sigma: float, stats: SufficientStats, i: int, j: int) -> float:
    """Gaussian specialization of :func:`gllr` as an explicit quadratic form."""
    if i == j:
        raise ValueError("gllr requires two distinct arms")
    ti = stats.counts[i]
    tj = stats.counts[j]
    if ti < 1 or tj < 1:
        raise UnpulledArmError(f"arms {i}, {j} must both have pulls")
    d = stats.means[i] - stats.means[j]
    if d <= 0.0:
        return 0.0
    return d * d / (2.0 * sigma * sigma * (1.0 / ti + 1.0 / tj))


def gllr_for(family: RewardFamily):
    """Return a fast ``(stats, i, j) -> gllr`` closure for ``family``."""
    if isinstance(family, GaussianKnownVariance):
        sig = family.sigma

        def _g(stats: SufficientStats, i: int, j: int) -> float:
            return gllr_gaussian(sig, stats, i, j)

        return _g

    def _g(stats: SufficientStats, i: int, j: int) -> float:
        return gllr(family, stats, i, j)

    return _g
