"""Independent reference computations used by the tests.

None of these call into the code paths they check.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import binom


def chernoff_by_minimization(p: float, q: float) -> float:
    """-ln min_s sum_x P(x)^s Q(x)^(1-s), found numerically over s in (0, 1)."""

    def g(s):
        return p**s * q ** (1 - s) + (1 - p) ** s * (1 - q) ** (1 - s)

    res = minimize_scalar(g, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return -math.log(min(res.fun, g(1e-15), g(1 - 1e-15)))


def trials_by_oracle(p: float, q: float, max_error: float) -> int:
    return max(1, math.ceil(-math.log(2 * max_error) / chernoff_by_minimization(p, q)))


def smallest_null_count(n: int, p: float, q: float) -> int | None:
    """Smallest success count whose binomial likelihood under p is at least that under q (p > q)."""
    for k in range(n + 1):
        if binom.pmf(k, n, p) >= binom.pmf(k, n, q):
            return k
    return None


def interferometer_path_probabilities(coherence: float = 1.0) -> dict[str, float]:
    """Click probabilities from beamsplitter amplitudes on the four paths.

    Alice's launched photon is (|S> + |L>)/sqrt2 in time. Bob splits it
    again into short/long arms (amplitude 1/sqrt2 each) and recombines on a
    50/50 splitter whose transfer matrix is [[1, 1], [1, -1]]/sqrt2. SS and LL
    arrive alone in their time bins; SL and LS share the middle bin, where
    their amplitudes add with visibility ``coherence``.
    """
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    a = 1 / math.sqrt(2)
    # amplitude to reach port j of Bob's last splitter via his arm (arm 0 short, 1 long)
    amp = {(alice, bob, port): a * a * bs[port, bob] for alice in "SL" for bob in (0, 1) for port in (0, 1)}
    ss = sum(abs(amp[("S", 0, port)]) ** 2 for port in (0, 1))
    ll = sum(abs(amp[("L", 1, port)]) ** 2 for port in (0, 1))
    middle = {}
    for port in (0, 1):
        x, y = amp[("S", 1, port)], amp[("L", 0, port)]
        middle[port] = abs(x) ** 2 + abs(y) ** 2 + 2 * coherence * (x * np.conj(y)).real
    # bright port is whichever one the ideal interference fills
    bright, dark = (middle[0], middle[1]) if middle[0] >= middle[1] else (middle[1], middle[0])
    return {"SS": ss, "LL": ll, "MIDDLE_BRIGHT": bright, "MIDDLE_DARK": dark}


def poisson_pmf(n: int, mu: float) -> float:
    return mu**n * math.exp(-mu) / math.factorial(n)


def within_sigma(observed: float, expected: float, sigma: float, k: float = 3.0) -> bool:
    return abs(observed - expected) <= k * sigma


def binomial_sigma(p: float, n: int) -> float:
    """Standard error of an observed fraction."""
    return math.sqrt(max(p * (1 - p), 1e-300) / n)
