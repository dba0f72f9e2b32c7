"""Sequential best-arm identification policies.

All policies share one round protocol, driven by the experiment harness:

1. ``arm = policy.select_arm()`` picks the arm for this round. The first
   ``K`` rounds are an initialization pass pulling each arm exactly once so
   every empirical mean is defined before any rule activates.
2. The environment draws a reward for ``arm``.
3. ``policy.record(arm, reward)`` folds the reward into the sufficient
   statistics and refreshes the policy's top-two pair from the post-update
   state.
4. ``stopping_check(policy, spec, arm)`` compares the round's stopping
   statistic against the round's threshold.

Sampling pair versus stopping pair: each policy keeps the pair of arms its
sampling rule randomizes over (``leader``/``challenger``), which for the
Thompson-style policies comes from posterior draws. The stopping rule is the
same for every policy and uses the canonical statistic: the likelihood ratio
between the empirical best arm and its closest competitor, i.e. the minimum
over alternatives. For the likelihood-ratio policies the two pairs coincide;
for posterior policies a randomly drawn distant challenger must not trigger
stopping while the real contest is still open, so the stopping statistic is
kept separate. The recommendation at stopping is always the empirical best
arm.

Policies that randomize between the top two arms consume exactly one
Bernoulli(beta) coin per round, drawn whether or not it is used, so seeded
runs of different variants stay aligned on the coin stream. All argmax and
argmin ties break toward the lowest arm index.

The Thompson-sampling challenger search (resample the posterior until the
best coordinate changes) is implemented in two phases: a direct phase that
draws a bounded number of posterior samples, then an exact tail that draws
the remaining count from the geometric law of the search and the challenger
identity from its conditional distribution. Both phases follow the same
stochastic process; the tail phase merely avoids materializing the
individual draws, whose expected number grows exponentially once the
posterior concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .families import BanditInstance, GaussianKnownVariance, RewardFamily
from .stats import SufficientStats, gllr_for
from .thresholds import ThresholdSpec, threshold

DEFAULT_RESAMPLE_CAP = 10**7

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(96)

# Posterior draws attempted directly before switching to the exact tail.
_DIRECT_BLOCKS = (16, 112)


@dataclass(frozen=True)
class StepOutcome:
    """What one round produced: the pull, the test statistic, the verdict."""

    chosen_arm: int
    stopped: bool
    gllr_value: float
    threshold_value: float
    challenger_resamples: int = 0
    resamples_censored: bool = False


# ---------------------------------------------------------------------------
# posterior top-two machinery
# ---------------------------------------------------------------------------


def argmax_probabilities(means, sds) -> np.ndarray:
    """P(coordinate i is the largest) for independent Gaussian coordinates.

    Evaluated by Gauss-Hermite quadrature of the one-dimensional integral
    of each coordinate's density against the others' CDFs. Accurate in
    relative terms down to extremely small probabilities, which is what the
    exact tail of the challenger search needs.
    """
    m = np.asarray(means, dtype=float)
    s = np.asarray(sds, dtype=float)
    k = m.size
    t = m[:, None] + _SQRT2 * s[:, None] * _GH_NODES[None, :]
    z = (t[:, :, None] - m[None, None, :]) / s[None, None, :]
    cdf = ndtr(z)
    idx = np.arange(k)
    cdf[idx, :, idx] = 1.0
    return cdf.prod(axis=2) @ _GH_WEIGHTS / _SQRT_PI


def _geometric_count(u: float, q: float) -> float:
    """Inverse-CDF geometric sample (support 1, 2, ...), as a float.

    Monotone decreasing in ``q`` for fixed ``u``, which lets callers bound
    the sample from below with an upper bound on ``q``.
    """
    if q <= 0.0:
        return math.inf
    if q >= 1.0:
        return 1.0
    return math.floor(math.log(u) / math.log1p(-q)) + 1.0


def challenger_search(
    means,
    sds,
    leader: int,
    rng: np.random.Generator,
    cap: int = DEFAULT_RESAMPLE_CAP,
) -> tuple[int, int, bool]:
    """Resample the posterior until some coordinate beats ``leader``.

    Returns ``(challenger, draws_used, censored)``. ``draws_used`` counts
    every posterior sample inspected, including the successful one, and is
    reported as ``cap`` when the search is censored. A censored search
    falls back to the arm most likely to beat the leader per draw, so
    callers always receive a valid arm, with the censoring flagged rather
    than raised.

    Draws are materialized directly while a per-draw hit is likely; after
    a bounded direct phase the remaining count is sampled from the
    geometric law of the search (memorylessness) and the challenger from
    its conditional distribution, both from quadrature-exact hit
    probabilities. A union bound over pairwise win probabilities gates the
    direct phase and settles clearly-censored searches early; because the
    geometric inverse CDF is monotone in the hit probability, the gates
    change only the cost of the search, never the law of the result.
    """
    m = np.asarray(means, dtype=float)
    s = np.asarray(sds, dtype=float)
    k = m.size
    lead_mean = m[leader]
    lead_var = s[leader] * s[leader]
    pair_wins = [
        0.0
        if i == leader
        else 0.5
        * math.erfc((lead_mean - m[i]) / math.sqrt(2.0 * (lead_var + s[i] * s[i])))
        for i in range(k)
    ]
    hit_bound = sum(pair_wins)
    fallback = pair_wins.index(max(w for i, w in enumerate(pair_wins) if i != leader))

    drawn = 0
    if hit_bound * _DIRECT_BLOCKS[0] > 0.125:
        for block in _DIRECT_BLOCKS:
            block = min(block, cap - drawn)
            if block <= 0:
                break
            theta = rng.normal(m, s, size=(block, k))
            winners = theta.argmax(axis=1)
            hits = np.flatnonzero(winners != leader)
            if hits.size:
                first = int(hits[0])
                return int(winners[first]), drawn + first + 1, False
            drawn += block
    if drawn >= cap:
        return fallback, cap, True

    u = rng.random()
    while u == 0.0:
        u = rng.random()
    # The true hit probability is at most the union bound, so a count that
    # would exceed the cap even at the bound is censored for sure.
    if drawn + _geometric_count(u, min(hit_bound, 1.0)) > cap:
        return fallback, cap, True

    pi = argmax_probabilities(m, s)
    competitors = [i for i in range(k) if i != leader]
    q = float(sum(pi[i] for i in competitors))
    total = drawn + _geometric_count(u, q)
    if not total <= cap:
        return fallback, cap, True

    r = rng.random() * q
    acc = 0.0
    challenger = competitors[-1]
    for i in competitors:
        acc += pi[i]
        if r < acc:
            challenger = i
            break
    return challenger, int(total), False


def posterior_top_two(
    means,
    sds,
    rng: np.random.Generator,
    cap: int = DEFAULT_RESAMPLE_CAP,
) -> tuple[int, int, int, bool]:
    """Draw a leader from the posterior, then search for its challenger.

    Returns ``(leader, challenger, challenger_draws, censored)``. The leader
    costs one posterior sample, which is not counted in
    ``challenger_draws``.
    """
    theta = rng.normal(np.asarray(means, dtype=float), np.asarray(sds, dtype=float))
    leader = int(np.argmax(theta))
    challenger, draws, censored = challenger_search(means, sds, leader, rng, cap)
    return leader, challenger, draws, censored


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------


class _Policy:
    """State shared by every policy: statistics, sampling pair, stopping pair.

    ``leader``/``challenger`` drive the sampling rule. ``stop_leader`` is the
    empirical best arm, ``stop_gllr`` its likelihood ratio against the
    closest competitor ``stop_challenger``; these feed the stopping rule and
    the final recommendation.
    """

    uses_posterior = False

    def __init__(self, family: RewardFamily, n_arms: int, beta: float):
        if n_arms < 2:
            raise ValueError(f"need at least 2 arms, got {n_arms}")
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must be in (0, 1), got {beta!r}")
        self.family = family
        self.n_arms = n_arms
        self.beta = beta
        self.stats = SufficientStats(n_arms)
        self._gllr = gllr_for(family)
        self.leader: int | None = None
        self.challenger: int | None = None
        self.stop_leader: int | None = None
        self.stop_challenger: int | None = None
        self.stop_gllr = 0.0
        self.last_resamples = 0
        self.last_resamples_censored = False

    @property
    def pair_ready(self) -> bool:
        return self.stop_leader is not None

    @property
    def recommendation(self) -> int | None:
        return self.stop_leader

    def select_arm(self) -> int:
        raise NotImplementedError

    def record(self, arm: int, reward: float) -> None:
        self.stats.update(arm, reward)
        if self.stats.n >= self.n_arms:
            self._refresh_stopping_pair()
            self._refresh_sampling_pair()

    def _refresh_stopping_pair(self) -> None:
        # Leader is the empirical best; the challenger minimizes the
        # likelihood ratio against it. Lowest index wins every tie.
        means = self.stats.means
        leader = 0
        top = means[0]
        for i in range(1, self.n_arms):
            if means[i] > top:
                top = means[i]
                leader = i
        best = math.inf
        challenger = leader
        for i in range(self.n_arms):
            if i == leader:
                continue
            value = self._gllr(self.stats, leader, i)
            if value < best:
                best = value
                challenger = i
        self.stop_leader = leader
        self.stop_challenger = challenger
        self.stop_gllr = best

    def _refresh_sampling_pair(self) -> None:
        # Default: sample the same pair the stopping statistic tracks.
        self.leader = self.stop_leader
        self.challenger = self.stop_challenger


class TTSPRT(_Policy):
    """Top-two likelihood-ratio sampling with optional forced exploration.

    With ``forced_exploration`` on (the default, required outside the
    Gaussian family), any arm whose pull count has fallen to
    ceil(sqrt(n/K)) or below is pulled first, least-pulled arm first.
    Otherwise a Bernoulli(beta) coin picks between the empirical leader and
    the minimum-likelihood-ratio challenger.
    """

    def __init__(
        self,
        family: RewardFamily,
        n_arms: int,
        beta: float,
        coin_rng: np.random.Generator,
        forced_exploration: bool = True,
    ):
        super().__init__(family, n_arms, beta)
        self.coin_rng = coin_rng
        self.forced_exploration = forced_exploration

    def select_arm(self) -> int:
        coin = self.coin_rng.random() < self.beta
        n = self.stats.n
        if n < self.n_arms:
            return n
        if self.forced_exploration:
            limit = math.ceil(math.sqrt(n / self.n_arms))
            counts = self.stats.counts
            fewest = -1
            arm = -1
            for i in range(self.n_arms):
                c = counts[i]
                if c <= limit and (arm < 0 or c < fewest):
                    fewest = c
                    arm = i
            if arm >= 0:
                return arm
        return self.leader if coin else self.challenger


class UniformSampling(_Policy):
    """Round-robin control: arm n mod K, with the usual stopping test."""

    def select_arm(self) -> int:
        return self.stats.n % self.n_arms


class _PosteriorPolicy(_Policy):
    """Shared machinery for policies that sample a Gaussian posterior.

    The posterior over arm i's mean is Normal(mean_i, sigma^2 / T_i): the
    flat-prior limit of a conjugate Gaussian model. ``sigma`` defaults to
    the family's noise scale for Gaussian rewards and must be supplied
    explicitly otherwise.
    """

    uses_posterior = True

    def __init__(
        self,
        family: RewardFamily,
        n_arms: int,
        beta: float,
        coin_rng: np.random.Generator,
        posterior_rng: np.random.Generator,
        sigma: float | None = None,
    ):
        super().__init__(family, n_arms, beta)
        if sigma is None:
            if not isinstance(family, GaussianKnownVariance):
                raise ValueError(
                    "posterior sigma must be given for non-Gaussian families"
                )
            sigma = family.sigma
        if sigma <= 0.0:
            raise ValueError(f"posterior sigma must be positive, got {sigma!r}")
        self.sigma = float(sigma)
        self.coin_rng = coin_rng
        self.posterior_rng = posterior_rng
        self.total_resamples = 0
        self.censored_rounds = 0

    def select_arm(self) -> int:
        coin = self.coin_rng.random() < self.beta
        n = self.stats.n
        if n < self.n_arms:
            return n
        return self.leader if coin else self.challenger

    def _posterior_params(self) -> tuple[np.ndarray, np.ndarray]:
        means = np.array(self.stats.means, dtype=float)
        counts = np.array(self.stats.counts, dtype=float)
        return means, self.sigma / np.sqrt(counts)


class TTTS(_PosteriorPolicy):
    """Top-two Thompson sampling with resampled challengers.

    Each round draws the leader from the posterior and keeps resampling
    until the best coordinate changes; the count of challenger draws is
    exposed per round and capped at ``resample_cap`` with censoring rather
    than failure.
    """

    def __init__(
        self,
        family: RewardFamily,
        n_arms: int,
        beta: float,
        coin_rng: np.random.Generator,
        posterior_rng: np.random.Generator,
        sigma: float | None = None,
        resample_cap: int = DEFAULT_RESAMPLE_CAP,
    ):
        super().__init__(family, n_arms, beta, coin_rng, posterior_rng, sigma)
        if resample_cap < 1:
            raise ValueError(f"resample cap must be >= 1, got {resample_cap}")
        self.resample_cap = resample_cap

    def _refresh_sampling_pair(self) -> None:
        means, sds = self._posterior_params()
        leader, challenger, draws, censored = posterior_top_two(
            means, sds, self.posterior_rng, self.resample_cap
        )
        self.leader = leader
        self.challenger = challenger
        self.last_resamples = draws
        self.last_resamples_censored = censored
        self.total_resamples += draws
        if censored:
            self.censored_rounds += 1


class T3C(_PosteriorPolicy):
    """Transportation-cost variant of top-two Thompson sampling.

    The leader comes from a single posterior draw; the challenger minimizes
    the Gaussian likelihood-ratio proxy against the leader, so exactly one
    posterior sample is consumed per round.
    """

    def _refresh_sampling_pair(self) -> None:
        means, sds = self._posterior_params()
        theta = self.posterior_rng.normal(means, sds)
        leader = int(np.argmax(theta))
        stats = self.stats
        counts = stats.counts
        emp = stats.means
        lead_mean = emp[leader]
        lead_inv = 1.0 / counts[leader]
        scale = 2.0 * self.sigma * self.sigma
        best = math.inf
        challenger = leader
        for i in range(self.n_arms):
            if i == leader:
                continue
            d = lead_mean - emp[i]
            value = (
                0.0 if d <= 0.0 else d * d / (scale * (lead_inv + 1.0 / counts[i]))
            )
            if value < best:
                best = value
                challenger = i
        self.leader = leader
        self.challenger = challenger


def stopping_check(policy: _Policy, spec: ThresholdSpec, chosen_arm: int) -> StepOutcome:
    """Evaluate the stopping rule on the policy's canonical stopping pair."""
    if not policy.pair_ready:
        raise ValueError("stopping check requires every arm pulled at least once")
    c = threshold(spec, policy.stats.n)
    lam = policy.stop_gllr
    return StepOutcome(
        chosen_arm=chosen_arm,
        stopped=lam > c,
        gllr_value=lam,
        threshold_value=c,
        challenger_resamples=policy.last_resamples,
        resamples_censored=policy.last_resamples_censored,
    )


# ---------------------------------------------------------------------------
# challenger-cost bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurves:
    """Lower/upper bounds on the expected challenger-search draw count."""

    lower: float
    upper: float
    upper_valid: bool


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def ttts_bound_curves(instance: BanditInstance, sigma: float, n: int) -> BoundCurves:
    """Bound curves for the posterior draws needed to find a challenger.

    The lower bound scales like exp(sqrt(n/K)) and the upper like exp(n);
    the upper bound is only meaningful for n > 32 sigma^2 / (9 dmin^2),
    which is reported via ``upper_valid``. A zero minimum pairwise gap
    leaves the upper bound undefined and is rejected.
    """
    if n < 1:
        raise ValueError(f"round count must be >= 1, got {n}")
    dmin = instance.min_pairwise_gap
    if dmin == 0.0:
        raise ValueError("upper bound undefined when the minimum pairwise gap is 0")
    root = math.sqrt(n / instance.n_arms)
    denom = 4.0 * sigma * sigma
    lower = math.inf
    upper = 0.0
    for i, gap in enumerate(instance.gaps):
        if i == instance.best_arm:
            continue
        c_low = (gap - dmin / 2.0) ** 2 / denom
        c_up = (gap + dmin / 2.0) ** 2 / (2.0 * sigma * sigma)
        lower = min(lower, 2.0 * _safe_exp(root * c_low))
        upper = max(upper, math.sqrt(2.0 * math.pi * math.e) * _safe_exp(n * c_up))
    return BoundCurves(
        lower=lower,
        upper=upper,
        upper_valid=n > 32.0 * sigma * sigma / (9.0 * dmin * dmin),
    )
