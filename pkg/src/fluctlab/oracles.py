"""Exact reference probabilities for uniform samples, used to anchor Monte Carlo runs.

These are closed forms from order statistics and the Irwin-Hall law; none of them
touches the fiber or sampling code they are used to check.
"""

from __future__ import annotations

import math


def irwin_hall_cdf(x: float, n: int) -> float:
    """P{U_1 + ... + U_n <= x} for i.i.d. Unif[0, 1]."""
    if x <= 0:
        return 0.0
    if x >= n:
        return 1.0
    total = sum((-1) ** k * math.comb(n, k) * (x - k) ** n for k in range(int(math.floor(x)) + 1))
    return min(1.0, max(0.0, total / math.factorial(n)))


def mean_interval_probability(n: int, lo: float, hi: float, a: float = 0.0, ell: float = 1.0) -> float:
    """P{mean of n Unif[a, a + ell] lies in [lo, hi]} (Bates law)."""
    if hi <= lo:
        return 0.0
    to_sum = lambda v: n * (v - a) / ell  # noqa: E731
    return irwin_hall_cdf(to_sum(hi), n) - irwin_hall_cdf(to_sum(lo), n)


def range_gap_cdf(n: int, d: float, ell: float = 1.0) -> float:
    """P{ell - (max - min) <= d} for n i.i.d. Unif[0, ell].

    Uses P{range <= r} = n u^(n-1) - (n-1) u^n with u = r / ell.
    """
    if d <= 0:
        return 0.0
    if d >= ell:
        return 1.0
    u = 1.0 - d / ell
    return 1.0 - n * u ** (n - 1) + (n - 1) * u**n


def fiber_tail(n: int, r: float, ell: float = 1.0) -> float:
    """P{|fiber| <= r} for n i.i.d. Unif[0, ell]; equals r^2 / (2 ell^2) at n = 2."""
    return range_gap_cdf(n, r / math.sqrt(n), ell)
