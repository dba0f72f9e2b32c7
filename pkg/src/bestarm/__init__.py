"""Fixed-confidence best-arm identification for exponential-family bandits.

Library layout:

- :mod:`bestarm.families` -- reward families and bandit instances
- :mod:`bestarm.stats` -- sufficient statistics and likelihood ratios
- :mod:`bestarm.allocation` -- optimal proportions and problem complexity
- :mod:`bestarm.thresholds` -- stopping thresholds
- :mod:`bestarm.policies` -- sequential arm-selection policies
- :mod:`bestarm.harness` -- Monte Carlo experiments and CSV reports
- :mod:`bestarm.cli` -- command-line front end
"""

from .allocation import AllocationResult, lower_bound_samples, solve_allocation, transport_cost
from .families import (
    BanditInstance,
    Bernoulli,
    ExponentialMean,
    GaussianKnownVariance,
    InvalidMeanError,
    RewardFamily,
    family_from_name,
)
from .harness import (
    AggregateReport,
    ExperimentConfig,
    TrialRecord,
    run_experiment,
    run_trial,
    sweep_beta,
    ttts_cost_sweep,
    ttts_gap_sweep,
)
from .policies import (
    T3C,
    TTSPRT,
    TTTS,
    BoundCurves,
    StepOutcome,
    UniformSampling,
    challenger_search,
    posterior_top_two,
    stopping_check,
    ttts_bound_curves,
)
from .stats import SufficientStats, UnpulledArmError, gllr, gllr_gaussian, weighted_mean
from .thresholds import ThresholdSpec, c_exp, h, h_inverse, h_tilde, threshold

__all__ = [
    "AggregateReport",
    "AllocationResult",
    "BanditInstance",
    "Bernoulli",
    "BoundCurves",
    "ExperimentConfig",
    "ExponentialMean",
    "GaussianKnownVariance",
    "InvalidMeanError",
    "RewardFamily",
    "StepOutcome",
    "SufficientStats",
    "T3C",
    "TTSPRT",
    "TTTS",
    "ThresholdSpec",
    "TrialRecord",
    "UniformSampling",
    "UnpulledArmError",
    "c_exp",
    "challenger_search",
    "family_from_name",
    "gllr",
    "gllr_gaussian",
    "h",
    "h_inverse",
    "h_tilde",
    "lower_bound_samples",
    "posterior_top_two",
    "run_experiment",
    "run_trial",
    "solve_allocation",
    "stopping_check",
    "sweep_beta",
    "threshold",
    "transport_cost",
    "ttts_bound_curves",
    "ttts_cost_sweep",
    "ttts_gap_sweep",
    "weighted_mean",
]

__version__ = "0.1.0"
