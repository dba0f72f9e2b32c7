"""Optimal sampling proportions and the sample-complexity lower bound.

The problem complexity of an instance is the maximin value, over sampling
proportions that pin the best arm's share at ``beta``, of the smallest
pairwise transportation cost between the best arm and a challenger. At the
optimum all suboptimal arms' costs are equalized and each cost is strictly
increasing in that arm's share, so the solver runs an outer bisection on the
common cost value and inverts each arm's cost curve by an inner bisection
until the proportions fill the remaining mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .families import BanditInstance, RewardFamily


@dataclass(frozen=True)
class AllocationResult:
    """Solved sampling proportions for one instance and one beta.

    ``weights`` is a full probability vector with ``weights[best_arm] ==
    beta``; ``gamma`` is the equalized transportation cost (the problem
    complexity); ``residual`` is the worst-case spread of the per-arm costs
    around ``gamma``.
    """

    beta: float
    weights: tuple[float, ...]
    gamma: float
    solver_iterations: int
    residual: float


def transport_cost(
    family: RewardFamily,
    mu_star: float,
    mu_i: float,
    w_star: float,
    w_i: float,
) -> float:
    """Weighted two-arm transportation cost at the pooled mean.

    Equals w_star * d(mu_star || m) + w_i * d(mu_i || m) with m the
    weight-averaged mean, which is also the minimizer of the same expression
    over all means between mu_i and mu_star.
    """
    if not mu_star > mu_i:
        raise ValueError(
            f"transport cost needs mu_star > mu_i, got {mu_star!r} <= {mu_i!r}"
        )
    if w_star <= 0.0 or w_i <= 0.0:
        raise ValueError(f"weights must be positive, got {w_star!r}, {w_i!r}")
    m = (w_star * mu_star + w_i * mu_i) / (w_star + w_i)
    return w_star * family.kl(mu_star, m) + w_i * family.kl(mu_i, m)


def _invert_cost(
    family: RewardFamily,
    mu_star: float,
    mu_i: float,
    beta: float,
    target: float,
    w_hi: float,
) -> float:
    """Solve transport_cost(..., beta, w) == target for w in (0, w_hi].

    The cost is 0 at w -> 0 and strictly increasing, so plain bisection on
    [0, w_hi] converges; the caller guarantees target <= cost(w_hi).
    """
    lo, hi = 0.0, w_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if transport_cost(family, mu_star, mu_i, beta, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_allocation(
    instance: BanditInstance,
    beta: float,
    mass_tol: float = 1e-10,
    max_iterations: int = 200,
) -> AllocationResult:
    """Compute the beta-optimal proportions and the problem complexity.

    Raises ValueError for beta outside (0, 1) (a non-unique best arm is
    rejected by ``BanditInstance`` itself) and RuntimeError if the outer
    bisection fails to meet ``mass_tol`` within ``max_iterations``.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0, 1), got {beta!r}")

    family = instance.family
    star = instance.best_arm
    mu_star = instance.best_mean
    others = [i for i in range(instance.n_arms) if i != star]
    rest = 1.0 - beta

    if len(others) == 1:
        # The simplex constraint leaves no freedom with two arms.
        i = others[0]
        gamma = transport_cost(family, mu_star, instance.means[i], beta, rest)
        weights = [0.0] * instance.n_arms
        weights[star] = beta
        weights[i] = rest
        return AllocationResult(beta, tuple(weights), gamma, 0, 0.0)

    caps = [
        transport_cost(family, mu_star, instance.means[i], beta, rest) for i in others
    ]
    c_lo, c_hi = 0.0, min(caps)

    iterations = 0
    shares = [rest / len(others)] * len(others)
    for iterations in range(1, max_iterations + 1):
        c_mid = 0.5 * (c_lo + c_hi)
        shares = [
            _invert_cost(family, mu_star, instance.means[i], beta, c_mid, rest)
            for i in others
        ]
        excess = sum(shares) - rest
        if abs(excess) <= mass_tol:
            break
        if excess > 0.0:
            c_hi = c_mid
        else:
            c_lo = c_mid
    else:
        raise RuntimeError(
            f"allocation solver did not reach mass tolerance {mass_tol} "
            f"within {max_iterations} iterations"
        )

    weights = [0.0] * instance.n_arms
    weights[star] = beta
    for i, w in zip(others, shares):
        weights[i] = w
    costs = [
        transport_cost(family, mu_star, instance.means[i], beta, w)
        for i, w in zip(others, shares)
    ]
    return AllocationResult(
        beta=beta,
        weights=tuple(weights),
        gamma=min(costs),
        solver_iterations=iterations,
        residual=max(costs) - min(costs),
    )


def lower_bound_samples(instance: BanditInstance, beta: float, delta: float) -> float:
    """Asymptotic scale log(1/delta) / Gamma of the expected stopping time."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta!r}")
    result = solve_allocation(instance, beta)
    return math.log(1.0 / delta) / result.gamma
