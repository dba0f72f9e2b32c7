"""Monte Carlo experiment engine for the identification policies.

A trial is a pure function of ``(config, trial_index)``: every random stream
it touches is derived from the base seed and the trial index, so records are
bit-for-bit reproducible and trials can run in any order, serially or across
worker processes, without changing any reported number.

Per-trial substreams are split by purpose (rewards, the top-two coin,
posterior draws) so that policies consuming different amounts of randomness
remain comparable under paired seeds.

CSV output conventions: one file per report type, fixed headers, floats
printed with 17 significant digits, booleans as ``true``/``false``.
"""

from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .allocation import lower_bound_samples
from .families import BanditInstance, GaussianKnownVariance, family_from_name
from .policies import (
    DEFAULT_RESAMPLE_CAP,
    T3C,
    TTSPRT,
    TTTS,
    UniformSampling,
    challenger_search,
    stopping_check,
    ttts_bound_curves,
)
from .thresholds import ThresholdSpec

POLICY_IDS = ("ttsprt", "ttsprt-gaussian", "ttts", "t3c", "uniform")

# Substream labels: rewards, top-two coin, posterior draws, sweep cells.
_REWARDS, _COIN, _POSTERIOR, _SWEEP = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one batch of trials.

    ``threshold_kind`` of ``"auto"`` selects the Gaussian threshold for
    Gaussian rewards and the exponential-family threshold otherwise.
    ``posterior_sigma`` fixes the posterior scale of the Thompson-style
    policies; when omitted it defaults to the Gaussian family's sigma, or
    1.0 for other families. ``stop=False`` disables the stopping rule and
    runs every trial to ``horizon`` (allocation studies); with ``stop=True``
    a trial that reaches ``horizon`` is recorded as censored.
    """

    family: str
    means: tuple[float, ...]
    sigma: float = 1.0
    policy: str = "ttsprt"
    delta: float = 0.1
    beta: float = 0.5
    trials: int = 100
    seed: int = 0
    resample_cap: int = DEFAULT_RESAMPLE_CAP
    horizon: int = 10**7
    stop: bool = True
    threshold_kind: str = "auto"
    posterior_sigma: float | None = None
    trace_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        if self.policy not in POLICY_IDS:
            raise ValueError(
                f"unknown policy {self.policy!r}; expected one of {POLICY_IDS}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta!r}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must be in (0, 1), got {self.beta!r}")
        if self.trials < 1:
            raise ValueError(f"trial count must be >= 1, got {self.trials}")
        if self.horizon < len(self.means):
            raise ValueError("horizon must cover the initialization pass")
        if self.threshold_kind not in ("auto", "exponential", "gaussian"):
            raise ValueError(f"unknown threshold kind {self.threshold_kind!r}")

    def instance(self) -> BanditInstance:
        return BanditInstance(family_from_name(self.family, self.sigma), self.means)

    def resolved_threshold_kind(self) -> str:
        if self.threshold_kind != "auto":
            return self.threshold_kind
        return "gaussian" if self.family == "gaussian" else "exponential"


@dataclass(frozen=True)
class TrialRecord:
    """One completed trial: stopping time, verdict, and final allocation."""

    trial: int
    tau: int
    recommended: int
    correct: bool
    censored: bool
    counts: tuple[int, ...]
    total_resamples: int
    resamples_censored_rounds: int
    trace: tuple[tuple[int, tuple[int, ...]], ...] = ()


@dataclass(frozen=True)
class AggregateReport:
    """Order-independent summary of a batch of trials."""

    config: ExperimentConfig
    records: tuple[TrialRecord, ...] = field(repr=False)
    mean_tau: float
    se_tau: float
    median_tau: float
    q10_tau: float
    q90_tau: float
    error_rate: float
    error_se: float
    censored_trials: int
    resamples_censored_rounds: int
    mean_allocation: tuple[float, ...]
    lower_bound: float
    mean_tau_over_bound: float


def _stream(seed: int, index: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index, purpose))
    return np.random.Generator(np.random.PCG64(ss))


def _build_policy(config: ExperimentConfig, instance: BanditInstance, trial: int):
    coin = _stream(config.seed, trial, _COIN)
    family = instance.family
    k = instance.n_arms
    if config.policy == "ttsprt":
        return TTSPRT(family, k, config.beta, coin, forced_exploration=True)
    if config.policy == "ttsprt-gaussian":
        if not isinstance(family, GaussianKnownVariance):
            raise ValueError("policy 'ttsprt-gaussian' requires the gaussian family")
        return TTSPRT(family, k, config.beta, coin, forced_exploration=False)
    if config.policy == "uniform":
        return UniformSampling(family, k, config.beta)
    posterior = _stream(config.seed, trial, _POSTERIOR)
    sigma = config.posterior_sigma
    if sigma is None:
        sigma = family.sigma if isinstance(family, GaussianKnownVariance) else 1.0
    if config.policy == "ttts":
        return TTTS(
            family, k, config.beta, coin, posterior, sigma, config.resample_cap
        )
    return T3C(family, k, config.beta, coin, posterior, sigma)


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialRecord:
    """Run one trial to stopping (or the horizon), deterministically."""
    instance = config.instance()
    family = instance.family
    means = instance.means
    policy = _build_policy(config, instance, trial_index)
    reward_rng = _stream(config.seed, trial_index, _REWARDS)
    spec = ThresholdSpec(
        config.resolved_threshold_kind(), config.delta, instance.n_arms
    )
    k = instance.n_arms
    check_stop = config.stop
    horizon = config.horizon
    trace_every = config.trace_every
    trace: list[tuple[int, tuple[int, ...]]] = []

    while True:
        arm = policy.select_arm()
        reward = family.sample(means[arm], reward_rng)
        policy.record(arm, reward)
        n = policy.stats.n
        if trace_every and n % trace_every == 0:
            trace.append((n, tuple(policy.stats.counts)))
        if check_stop and n >= k:
            outcome = stopping_check(policy, spec, arm)
            if outcome.stopped:
                censored = False
                break
        if n >= horizon:
            censored = check_stop
            break

    recommended = policy.recommendation if policy.recommendation is not None else 0
    return TrialRecord(
        trial=trial_index,
        tau=policy.stats.n,
        recommended=recommended,
        correct=recommended == instance.best_arm,
        censored=censored,
        counts=tuple(policy.stats.counts),
        total_resamples=getattr(policy, "total_resamples", 0),
        resamples_censored_rounds=getattr(policy, "censored_rounds", 0),
        trace=tuple(trace),
    )


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> AggregateReport:
    records = sorted(records, key=lambda r: r.trial)
    taus = np.array([r.tau for r in records], dtype=float)
    trials = len(records)
    errors = sum(not r.correct for r in records)
    error_rate = errors / trials
    mean_tau = float(taus.mean())
    se_tau = float(taus.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    alloc = np.array(
        [[c / r.tau for c in r.counts] for r in records], dtype=float
    ).mean(axis=0)
    bound = lower_bound_samples(config.instance(), config.beta, config.delta)
    return AggregateReport(
        config=config,
        records=tuple(records),
        mean_tau=mean_tau,
        se_tau=se_tau,
        median_tau=float(np.median(taus)),
        q10_tau=float(np.quantile(taus, 0.1)),
        q90_tau=float(np.quantile(taus, 0.9)),
        error_rate=error_rate,
        error_se=math.sqrt(error_rate * (1.0 - error_rate) / trials),
        censored_trials=sum(r.censored for r in records),
        resamples_censored_rounds=sum(r.resamples_censored_rounds for r in records),
        mean_allocation=tuple(float(a) for a in alloc),
        lower_bound=bound,
        mean_tau_over_bound=mean_tau / bound if bound > 0.0 else math.inf,
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> AggregateReport:
    """Run all trials of ``config``; the report is independent of ``threads``."""
    if threads <= 1 or config.trials == 1:
        records = [run_trial(config, i) for i in range(config.trials)]
    else:
        chunk = max(1, config.trials // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(
                pool.map(
                    run_trial,
                    [config] * config.trials,
                    range(config.trials),
                    chunksize=chunk,
                )
            )
    return _aggregate(config, records)


def sweep_beta(
    config: ExperimentConfig, betas: list[float], threads: int = 1
) -> list[AggregateReport]:
    """One report per beta, sharing the instance and the seed schedule."""
    return [run_experiment(replace(config, beta=b), threads) for b in betas]


# ---------------------------------------------------------------------------
# challenger-cost sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostSweepRow:
    """Challenger-search cost at one synthetic post-convergence state."""

    n: int
    gap: float
    draws: int
    mean_draws: float
    se_draws: float
    lower: float
    upper: float
    upper_valid: bool
    censored_draws: int


def ttts_cost_sweep(
    instance: BanditInstance,
    sigma: float,
    n_grid: list[int],
    draws_per_n: int,
    seed: int,
    beta: float = 0.5,
    weights: tuple[float, ...] | None = None,
    resample_cap: int = DEFAULT_RESAMPLE_CAP,
) -> list[CostSweepRow]:
    """Measure challenger-search draw counts on idealized converged states.

    For each n the synthetic state has per-arm counts round(n * w) (at least
    one) with empirical means equal to the true means and the leader fixed
    at the best arm, which is the regime the bound curves describe. Censored
    searches contribute the cap to the mean and are counted, never dropped.
    ``weights`` defaults to beta on the best arm and the rest spread evenly.
    """
    if draws_per_n < 1:
        raise ValueError(f"draws_per_n must be >= 1, got {draws_per_n}")
    k = instance.n_arms
    star = instance.best_arm
    if weights is None:
        share = (1.0 - beta) / (k - 1)
        weights = tuple(beta if i == star else share for i in range(k))
    if len(weights) != k or any(w <= 0.0 for w in weights):
        raise ValueError(f"weights must be {k} positive shares, got {weights!r}")
    gap = min(g for i, g in enumerate(instance.gaps) if i != star)
    means = np.array(instance.means, dtype=float)

    rows = []
    for cell, n in enumerate(n_grid):
        counts = np.maximum(1, np.rint(n * np.asarray(weights)))
        sds = sigma / np.sqrt(counts)
        rng = _stream(seed, cell, _SWEEP)
        draws = np.empty(draws_per_n, dtype=float)
        censored = 0
        for d in range(draws_per_n):
            _, used, was_censored = challenger_search(
                means, sds, star, rng, resample_cap
            )
            draws[d] = used
            censored += was_censored
        bounds = ttts_bound_curves(instance, sigma, n)
        rows.append(
            CostSweepRow(
                n=n,
                gap=gap,
                draws=draws_per_n,
                mean_draws=float(draws.mean()),
                se_draws=float(draws.std(ddof=1) / math.sqrt(draws_per_n))
                if draws_per_n > 1
                else 0.0,
                lower=bounds.lower,
                upper=bounds.upper,
                upper_valid=bounds.upper_valid,
                censored_draws=censored,
            )
        )
    return rows


def ttts_gap_sweep(
    gaps: list[float],
    draws_per_n: int,
    seed: int,
    n: int = 500,
    sigma: float = 1.0,
    beta: float = 0.5,
    resample_cap: int = DEFAULT_RESAMPLE_CAP,
) -> list[CostSweepRow]:
    """Challenger-search cost versus the gap on two-arm instances, n fixed."""
    rows = []
    for j, gap in enumerate(gaps):
        instance = BanditInstance(GaussianKnownVariance(sigma), (gap, 0.0))
        rows.extend(
            ttts_cost_sweep(
                instance,
                sigma,
                [n],
                draws_per_n,
                seed=seed + j,
                beta=beta,
                resample_cap=resample_cap,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_rows(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_trials_csv(report: AggregateReport, path: str) -> None:
    """Schema: trial,tau,recommended,correct,censored,total_resamples,
    resamples_censored_rounds,count_<i>... (one count column per arm)."""
    k = len(report.config.means)
    header = [
        "trial",
        "tau",
        "recommended",
        "correct",
        "censored",
        "total_resamples",
        "resamples_censored_rounds",
    ] + [f"count_{i}" for i in range(k)]
    rows = [
        [
            r.trial,
            r.tau,
            r.recommended,
            r.correct,
            r.censored,
            r.total_resamples,
            r.resamples_censored_rounds,
        ]
        + list(r.counts)
        for r in report.records
    ]
    _write_rows(path, header, rows)


def _summary_header(k: int) -> list[str]:
    return [
        "policy",
        "family",
        "delta",
        "beta",
        "trials",
        "mean_tau",
        "se_tau",
        "median_tau",
        "q10_tau",
        "q90_tau",
        "error_rate",
        "error_se",
        "censored_trials",
        "resamples_censored_rounds",
        "lower_bound",
        "mean_tau_over_bound",
    ] + [f"alloc_{i}" for i in range(k)]


def _summary_row(report: AggregateReport) -> list:
    c = report.config
    return [
        c.policy,
        c.family,
        c.delta,
        c.beta,
        c.trials,
        report.mean_tau,
        report.se_tau,
        report.median_tau,
        report.q10_tau,
        report.q90_tau,
        report.error_rate,
        report.error_se,
        report.censored_trials,
        report.resamples_censored_rounds,
        report.lower_bound,
        report.mean_tau_over_bound,
    ] + list(report.mean_allocation)


def write_summary_csv(report: AggregateReport, path: str) -> None:
    """Schema: one row of the aggregate fields plus alloc_<i> columns."""
    _write_rows(path, _summary_header(len(report.config.means)), [_summary_row(report)])


def write_sweep_csv(reports: list[AggregateReport], path: str) -> None:
    """Schema: the summary schema, one row per beta."""
    if not reports:
        raise ValueError("nothing to write: empty sweep")
    k = len(reports[0].config.means)
    _write_rows(path, _summary_header(k), [_summary_row(r) for r in reports])


def write_cost_csv(rows: list[CostSweepRow], path: str) -> None:
    """Schema: n,gap,draws,mean_draws,se_draws,lower,upper,upper_valid,
    censored_draws."""
    header = [
        "n",
        "gap",
        "draws",
        "mean_draws",
        "se_draws",
        "lower",
        "upper",
        "upper_valid",
        "censored_draws",
    ]
    _write_rows(
        path,
        header,
        [
            [
                r.n,
                r.gap,
                r.draws,
                r.mean_draws,
                r.se_draws,
                r.lower,
                r.upper,
                r.upper_valid,
                r.censored_draws,
            ]
            for r in rows
        ],
    )
