"""Single-parameter exponential-family reward models for stochastic bandits.

Every family here is identified by its mean value: each class maps means to
natural parameters and back, evaluates the closed-form KL divergence between
two members, and draws i.i.d. rewards. Means on the boundary of the closed
mean range (for example a Bernoulli empirical mean of exactly 0 or 1) are
legal inputs to ``kl`` and may produce ``math.inf``; strictly interior means
are required wherever a distribution is actually sampled or reparametrized.

``math.inf`` is used as a first-class extended real throughout: comparisons
against it are total, so argmin/argmax over divergences and likelihood ratios
stay well defined without sentinel values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidMeanError(ValueError):
    """A mean parameter lies outside the family's valid mean range."""


class RewardFamily:
    """Base class for single-parameter exponential families.

    Subclasses fix a log-partition function ``b`` and expose the pair of
    mutually inverse maps between means and natural parameters, the
    mean-parametrized KL divergence, and reward sampling. Instances are
    immutable and safe to share across trials.
    """

    name: str = "abstract"

    # -- mean-range checks -------------------------------------------------

    def in_closed_range(self, mu: float) -> bool:
        raise NotImplementedError

    def in_open_range(self, mu: float) -> bool:
        raise NotImplementedError

    def require_closed(self, mu: float) -> None:
        if not self.in_closed_range(mu):
            raise InvalidMeanError(
                f"mean {mu!r} outside the closed mean range of {self.name}"
            )

    def require_open(self, mu: float) -> None:
        if not self.in_open_range(mu):
            raise InvalidMeanError(
                f"mean {mu!r} not strictly inside the mean range of {self.name}"
            )

    # -- family maps -------------------------------------------------------

    def kl(self, mu_i: float, mu_j: float) -> float:
        """KL divergence d(mu_i || mu_j), a nonnegative extended real.

        Both arguments may lie on the boundary of the closed mean range
        (empirical means reach it); the result is ``math.inf`` exactly when
        the two members are mutually singular there.
        """
        raise NotImplementedError

    def sample(self, mu: float, rng: np.random.Generator) -> float:
        """One i.i.d. reward draw from the member with mean ``mu``."""
        raise NotImplementedError

    def natural_param(self, mu: float) -> float:
        """Natural parameter of the member with mean ``mu``."""
        raise NotImplementedError

    def mean_from_natural(self, theta: float) -> float:
        """Mean of the member with natural parameter ``theta``."""
        raise NotImplementedError

    def log_partition(self, theta: float) -> float:
        """Log-partition function ``b(theta)``."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class GaussianKnownVariance(RewardFamily):
    """Gaussian rewards with known standard deviation ``sigma``.

    Parametrization: b(theta) = sigma^2 theta^2 / 2, theta = mu / sigma^2.
    The mean range is all of R.
    """

    name = "gaussian"

    def __init__(self, sigma: float = 1.0):
        sigma = float(sigma)
        if not (sigma > 0.0 and math.isfinite(sigma)):
            raise ValueError(f"sigma must be a positive real, got {sigma!r}")
        self.sigma = sigma

    def in_closed_range(self, mu: float) -> bool:
        return math.isfinite(mu)

    in_open_range = in_closed_range

    def kl(self, mu_i: float, mu_j: float) -> float:
        self.require_closed(mu_i)
        self.require_closed(mu_j)
        d = mu_i - mu_j
        return d * d / (2.0 * self.sigma * self.sigma)

    def sample(self, mu: float, rng: np.random.Generator) -> float:
        self.require_open(mu)
        return float(rng.normal(mu, self.sigma))

    def natural_param(self, mu: float) -> float:
        self.require_open(mu)
        return mu / (self.sigma * self.sigma)

    def mean_from_natural(self, theta: float) -> float:
        return theta * self.sigma * self.sigma

    def log_partition(self, theta: float) -> float:
        return 0.5 * self.sigma * self.sigma * theta * theta

    def __repr__(self) -> str:
        return f"GaussianKnownVariance(sigma={self.sigma!r})"


class Bernoulli(RewardFamily):
    """Bernoulli rewards; the mean is the success probability.

    Parametrization: b(theta) = log(1 + e^theta), theta = logit(mu). The open
    mean range is (0, 1); empirical means may hit 0 or 1, where the KL against
    any other mean is infinite.
    """

    name = "bernoulli"

    def in_closed_range(self, mu: float) -> bool:
        return 0.0 <= mu <= 1.0

    def in_open_range(self, mu: float) -> bool:
        return 0.0 < mu < 1.0

    def kl(self, mu_i: float, mu_j: float) -> float:
        self.require_closed(mu_i)
        self.require_closed(mu_j)
        if mu_i == mu_j:
            return 0.0
        if mu_j <= 0.0 or mu_j >= 1.0:
            return math.inf
        # 0 log 0 = 0 at the boundary values of mu_i.
        if mu_i == 0.0:
            return -math.log1p(-mu_j)
        if mu_i == 1.0:
            return -math.log(mu_j)
        return mu_i * math.log(mu_i / mu_j) + (1.0 - mu_i) * math.log(
            (1.0 - mu_i) / (1.0 - mu_j)
        )

    def sample(self, mu: float, rng: np.random.Generator) -> float:
        self.require_open(mu)
        return 1.0 if rng.random() < mu else 0.0

    def natural_param(self, mu: float) -> float:
        self.require_open(mu)
        return math.log(mu / (1.0 - mu))

    def mean_from_natural(self, theta: float) -> float:
        if theta >= 0.0:
            return 1.0 / (1.0 + math.exp(-theta))
        z = math.exp(theta)
        return z / (1.0 + z)

    def log_partition(self, theta: float) -> float:
        if theta > 0.0:
            return theta + math.log1p(math.exp(-theta))
        return math.log1p(math.exp(theta))


class ExponentialMean(RewardFamily):
    """Exponentially distributed rewards parametrized by their mean.

    Parametrization: theta = -1/mu, b(theta) = -log(-theta). The open mean
    range is (0, inf); an empirical mean of exactly 0 sits on the boundary,
    where the KL against any positive mean is infinite (the likelihood of an
    all-zero sample diverges as the mean shrinks).
    """

    name = "exponential"

    def in_closed_range(self, mu: float) -> bool:
        return mu >= 0.0 and not math.isinf(mu)

    def in_open_range(self, mu: float) -> bool:
        return mu > 0.0 and not math.isinf(mu)

    def kl(self, mu_i: float, mu_j: float) -> float:
        self.require_closed(mu_i)
        self.require_closed(mu_j)
        if mu_i == mu_j:
            return 0.0
        if mu_j == 0.0 or mu_i == 0.0:
            return math.inf
        r = mu_i / mu_j
        return r - 1.0 - math.log(r)

    def sample(self, mu: float, rng: np.random.Generator) -> float:
        self.require_open(mu)
        return float(rng.exponential(mu))

    def natural_param(self, mu: float) -> float:
        self.require_open(mu)
        return -1.0 / mu

    def mean_from_natural(self, theta: float) -> float:
        if theta >= 0.0:
            raise InvalidMeanError(f"natural parameter must be negative, got {theta!r}")
        return -1.0 / theta

    def log_partition(self, theta: float) -> float:
        if theta >= 0.0:
            raise InvalidMeanError(f"natural parameter must be negative, got {theta!r}")
        return -math.log(-theta)


_FAMILY_NAMES = {
    "gaussian": GaussianKnownVariance,
    "bernoulli": Bernoulli,
    "exponential": ExponentialMean,
}


def family_from_name(name: str, sigma: float = 1.0) -> RewardFamily:
    """Build a reward family from its CLI/config name.

    ``sigma`` is consumed only by the Gaussian family.
    """
    key = name.strip().lower()
    if key not in _FAMILY_NAMES:
        raise ValueError(
            f"unknown family {name!r}; expected one of {sorted(_FAMILY_NAMES)}"
        )
    if key == "gaussian":
        return GaussianKnownVariance(sigma)
    return _FAMILY_NAMES[key]()


@dataclass(frozen=True)
class BanditInstance:
    """Ground-truth bandit model: a reward family plus a mean vector.

    The best arm must be unique; ties among suboptimal arms are allowed
    (the minimum pairwise gap may be zero). Every mean must lie strictly
    inside the family's mean range so that rewards can actually be drawn.
    """

    family: RewardFamily
    means: tuple[float, ...]

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        if len(means) < 2:
            raise ValueError(f"need at least 2 arms, got {len(means)}")
        for m in means:
            self.family.require_open(m)
        top = max(means)
        if means.count(top) != 1:
            raise ValueError(f"best arm is not unique in means {means}")

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return self.means.index(max(self.means))

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def gaps(self) -> tuple[float, ...]:
        """Per-arm gap to the best mean (zero for the best arm itself)."""
        top = self.best_mean
        return tuple(top - m for m in self.means)

    @property
    def min_pairwise_gap(self) -> float:
        """Smallest |mu_i - mu_j| over all arm pairs; may be zero."""
        ordered = sorted(self.means)
        return min(b - a for a, b in zip(ordered, ordered[1:]))

    def sample(self, arm: int, rng: np.random.Generator) -> float:
        return self.family.sample(self.means[arm], rng)
