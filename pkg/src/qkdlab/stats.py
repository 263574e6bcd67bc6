"""Symmetric hypothesis testing between two Bernoulli distributions.

The null hypothesis has single-trial success probability ``p`` and the
alternative ``q``. With ``n`` independent trials and equal priors the
best achievable error probability is bounded by ``0.5 * exp(-n * C)``,
where ``C`` is the Chernoff distance (in nats).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PerfectlyDistinguishableError, UnreachableError

__all__ = [
    "BernoulliHypothesisPair",
    "DetectionPlan",
    "Hypothesis",
    "chernoff_distance",
    "crossover_fraction",
    "decide_hypothesis",
    "decision_table",
    "empirical_test_error",
    "max_error_probability",
    "plan_detection",
    "trials_needed",
]

# relative slack for calling two log-likelihoods equal
_TIE_RTOL = 1e-12


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):  # also rejects nan
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


class Hypothesis(enum.Enum):
    NULL = "null"
    ALTERNATIVE = "alternative"


@dataclass(frozen=True)
class BernoulliHypothesisPair:
    """Null success probability ``p`` against alternative ``q``."""

    p: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probability("p", self.p))
        object.__setattr__(self, "q", _check_probability("q", self.q))

    @property
    def p_bar(self) -> float:
        return 1.0 - self.p

    @property
    def q_bar(self) -> float:
        return 1.0 - self.q

    def swapped(self) -> "BernoulliHypothesisPair":
        return BernoulliHypothesisPair(self.q, self.p)


@dataclass(frozen=True)
class DetectionPlan:
    """Outcome of planning a fixed-sample test.

    ``trials_needed`` is ``None`` when the hypotheses coincide (C = 0) and no
    number of trials reaches ``max_error``.
    """

    chernoff_distance: float
    xi: float
    trials_needed: int | None
    max_error: float
    error_bound: float | None

    @property
    def reachable(self) -> bool:
        return self.trials_needed is not None


def _is_deterministic(x: float) -> bool:
    return x == 0.0 or x == 1.0


def crossover_fraction(h: BernoulliHypothesisPair) -> float:
    """Success fraction at which the two likelihoods balance.

    Deterministic endpoints use the analytic limit (``xi -> p`` when p is 0
    or 1, ``xi -> q`` when q is).
    """
    p, q = h.p, h.q
    if p == q or _is_deterministic(p):
        return p
    if _is_deterministic(q):
        return q
    num = math.log1p(-q) - math.log1p(-p)
    den = (math.log(p) - math.log1p(-p)) + (math.log1p(-q) - math.log(q))
    if den == 0.0:
        # p and q differ by less than the log resolution
        return p
    return min(1.0, max(0.0, num / den))


def chernoff_distance(h: BernoulliHypothesisPair) -> float:
    """Chernoff distance between Bernoulli(p) and Bernoulli(q), in nats."""
    p, q = h.p, h.q
    if p == q:
        return 0.0
    if _is_deterministic(p) and _is_deterministic(q):
        raise PerfectlyDistinguishableError(
            f"p={p} and q={q} are both deterministic; one trial separates them"
        )
    if _is_deterministic(p):
        return -math.log(q) if p == 1.0 else -math.log1p(-q)
    if _is_deterministic(q):
        return -math.log(p) if q == 1.0 else -math.log1p(-p)
    xi = crossover_fraction(h)
    xi_bar = 1.0 - xi
    c = 0.0
    if xi > 0.0:
        c += xi * (math.log(xi) - math.log(p))
    if xi_bar > 0.0:
        c += xi_bar * (math.log(xi_bar) - math.log1p(-p))
    return max(c, 0.0)


def max_error_probability(n: int, h: BernoulliHypothesisPair) -> float:
    """Upper bound ``0.5 * exp(-n C)`` on the symmetric error after n trials."""
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    return 0.5 * math.exp(-int(n) * chernoff_distance(h))


def trials_needed(h: BernoulliHypothesisPair, max_error: float) -> int:
    """Smallest n (at least 1) whose error bound does not exceed ``max_error``."""
    max_error = float(max_error)
    if not (0.0 < max_error < 0.5):
        raise DomainError(f"max_error must lie in (0, 0.5), got {max_error!r}")
    c = chernoff_distance(h)
    if c == 0.0:
        raise UnreachableError(
            f"hypotheses p={h.p} and q={h.q} are indistinguishable (Chernoff distance 0)"
        )
    n = max(1, math.ceil(-math.log(2.0 * max_error) / c))
    # guard the ceiling against rounding in the division
    if n > 1 and 0.5 * math.exp(-(n - 1) * c) <= max_error:
        n -= 1
    elif 0.5 * math.exp(-n * c) > max_error:
        n += 1
    return n


def plan_detection(h: BernoulliHypothesisPair, max_error: float) -> DetectionPlan:
    c = chernoff_distance(h)
    xi = crossover_fraction(h)
    try:
        n = trials_needed(h, max_error)
    except UnreachableError:
        return DetectionPlan(c, xi, None, float(max_error), None)
    return DetectionPlan(c, xi, n, float(max_error), max_error_probability(n, h))


def _log_likelihood(k, n, prob):
    """Binomial log-likelihood without the comb term; 0*log(0) taken as 0."""
    k = np.asarray(k, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(k > 0, k * np.log(prob), 0.0)
        b = np.where(n - k > 0, (n - k) * np.log1p(-prob), 0.0)
    return a + b


def decision_table(trials: int, h: BernoulliHypothesisPair) -> np.ndarray:
    """Boolean array over success counts 0..trials: True where Null is chosen."""
    if h.p == h.q:
        raise DomainError("decision needs p != q")
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    k = np.arange(int(trials) + 1)
    return _null_wins(k, int(trials), h.p, h.q)


def _null_wins(k, n, p, q):
    ll0 = _log_likelihood(k, n, p)
    ll1 = _log_likelihood(k, n, q)
    both_impossible = np.isneginf(ll0) & np.isneginf(ll1)
    with np.errstate(invalid="ignore"):
        diff = np.where(both_impossible, 0.0, ll0 - ll1)
        scale = np.maximum(1.0, np.maximum(np.abs(ll0), np.abs(ll1)))
        tie = np.isfinite(diff) & (np.abs(diff) <= _TIE_RTOL * scale)
    return (diff > 0) | tie


def decide_hypothesis(successes: int, trials: int, h: BernoulliHypothesisPair) -> Hypothesis:
    """Maximum-likelihood choice between the hypotheses; ties go to Null."""
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    if int(successes) != successes or not 0 <= successes <= trials:
        raise DomainError(f"successes must be an integer in [0, {trials}], got {successes!r}")
    if h.p == h.q:
        raise DomainError("decision needs p != q")
    null = bool(_null_wins(np.asarray(int(successes)), int(trials), h.p, h.q))
    return Hypothesis.NULL if null else Hypothesis.ALTERNATIVE


def empirical_test_error(
    h: BernoulliHypothesisPair, n: int, repetitions: int, rng: np.random.Generator
) -> float:
    """Monte Carlo error rate of the ML test under equal priors."""
    table = decision_table(n, h)
    truth_null = rng.random(repetitions) < 0.5
    counts = rng.binomial(n, np.where(truth_null, h.p, h.q))
    chose_null = table[counts]
    return float(np.mean(chose_null != truth_null))
