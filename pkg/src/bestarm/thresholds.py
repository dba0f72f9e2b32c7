"""Stopping thresholds for the sequential likelihood-ratio test.

Two threshold schedules are provided. The exponential-family schedule is
built from the convex function h(u) = u - log u, its inverse branch on
[1, inf), and a piecewise map h_tilde; it grows like 6*log(log(n/2)+1) in
the round count. The Gaussian schedule is lighter, growing like
4*log(4+log n). Both are decreasing in the confidence parameter delta and
valid for any arm-selection rule.

The "stylized" threshold log((1+log n)/delta) used by some experimental
codebases is deliberately not implemented; it lacks an error guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

ZETA_2 = math.pi * math.pi / 6.0


def h(u: float) -> float:
    """h(u) = u - log(u), defined for u >= 1 (maps [1, inf) onto [1, inf))."""
    if u < 1.0:
        raise ValueError(f"h requires u >= 1, got {u!r}")
    return u - math.log(u)


def h_inverse(x: float, tol: float = 1e-12, max_iterations: int = 200) -> float:
    """Upper branch of the inverse of :func:`h` (the root with u >= 1).

    Safeguarded Newton iteration: h is convex and increasing on [1, inf),
    so Newton from inside a bracketing interval converges; any iterate that
    escapes the bracket falls back to bisection.
    """
    if x < 1.0:
        raise ValueError(f"h_inverse requires x >= 1, got {x!r}")
    if x == 1.0:
        return 1.0
    lo = 1.0
    hi = x + math.log(x) + 1.0  # h(hi) > x since log(hi) < log(x) + 1
    u = max(x, 1.0 + x / 2.0)
    if not lo < u < hi:
        u = 0.5 * (lo + hi)
    for _ in range(max_iterations):
        f = u - math.log(u) - x
        if abs(f) <= tol:
            return u
        if f > 0.0:
            hi = u
        else:
            lo = u
        step = f / (1.0 - 1.0 / u)
        nxt = u - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        u = nxt
    return u


def h_tilde(z: float, x: float) -> float:
    """Piecewise transform used by the exponential-family threshold.

    For z in [1, e]: equals exp(1/h_inverse(x)) * h_inverse(x) when
    x >= h(1/log z), and z * (x - log log z) otherwise. Continuous at the
    branch point.
    """
    if not 1.0 <= z <= math.e:
        raise ValueError(f"h_tilde requires z in [1, e], got {z!r}")
    log_z = math.log(z)
    if x >= h(1.0 / log_z):
        u = h_inverse(x)
        return math.exp(1.0 / u) * u
    return z * (x - math.log(log_z))


def c_exp(x: float) -> float:
    """Calibration function of the exponential-family threshold.

    Exact value 2 * h_tilde_{3/2}((h_inverse(1+x) + log(2*zeta(2))) / 2);
    asymptotically x + 4*log(1 + x + sqrt(2x)).
    """
    if x < 0.0:
        raise ValueError(f"c_exp requires x >= 0, got {x!r}")
    arg = 0.5 * (h_inverse(1.0 + x) + math.log(2.0 * ZETA_2))
    return 2.0 * h_tilde(1.5, arg)


def g(x: float) -> float:
    """g(x) = x + log(x) for x > 0 (Gaussian threshold calibration)."""
    if x <= 0.0:
        raise ValueError(f"g requires x > 0, got {x!r}")
    return x + math.log(x)


@dataclass(frozen=True)
class ThresholdSpec:
    """Which stopping threshold to evaluate, for a given delta and arm count.

    ``kind`` is ``"exponential"`` (valid for every family here) or
    ``"gaussian"`` (tighter, Gaussian rewards only).
    """

    kind: str
    delta: float
    num_arms: int

    def __post_init__(self):
        if self.kind not in ("exponential", "gaussian"):
            raise ValueError(f"unknown threshold kind {self.kind!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta!r}")
        if self.num_arms < 2:
            raise ValueError(f"need at least 2 arms, got {self.num_arms}")

    @cached_property
    def _constant(self) -> float:
        # n-independent part, precomputed since the schedule is evaluated
        # once per round.
        x = math.log((self.num_arms - 1) / self.delta)
        if self.kind == "exponential":
            return 2.0 * c_exp(x)
        if x <= 0.0:
            raise ValueError(
                f"gaussian threshold needs log((K-1)/delta) > 0, got {x!r}"
            )
        return 2.0 * g(0.5 * x)


def threshold(spec: ThresholdSpec, n: int) -> float:
    """Stopping threshold c_{n, delta} after ``n`` rounds.

    The exponential schedule's log(n/2) term is floored at zero for n < 2;
    a larger threshold is always safe and the rule cannot stop that early
    anyway.
    """
    if n < 1:
        raise ValueError(f"round count must be >= 1, got {n}")
    if spec.kind == "exponential":
        t = math.log(n / 2.0)
        if t < 0.0:
            t = 0.0
        return spec._constant + 6.0 * math.log(t + 1.0)
    return spec._constant + 4.0 * math.log(4.0 + math.log(n))
