import math

import numpy as np
import pytest
from scipy import integrate

from fluctlab import oracles


@pytest.mark.parametrize("n,x", [(2, 0.7), (3, 1.4), (4, 2.0), (4, 1.6)])
def test_irwin_hall_matches_numerical_convolution(n, x):
    h = 1e-4
    grid = np.arange(0, n + h, h)
    dens = np.where(grid <= 1, 1.0, 0.0)
    conv = dens.copy()
    for _ in range(n - 1):
        conv = np.convolve(conv, dens)[: len(grid)] * h
    cdf = np.cumsum(conv) * h
    assert oracles.irwin_hall_cdf(x, n) == pytest.approx(np.interp(x, grid, cdf), abs=2e-3 * n)


def test_irwin_hall_limits():
    assert oracles.irwin_hall_cdf(0.0, 3) == 0.0
    assert oracles.irwin_hall_cdf(3.0, 3) == 1.0
    assert oracles.irwin_hall_cdf(1.5, 3) == pytest.approx(0.5)


@pytest.mark.parametrize("n,d", [(2, 0.1), (3, 0.2), (4, 0.05), (6, 0.3)])
def test_range_gap_matches_order_statistic_quadrature(n, d):
    # joint density of (min, max) of n uniforms: n (n-1) (M - m)^(n-2) on 0 <= m <= M <= 1
    val, _ = integrate.dblquad(
        lambda M, m: n * (n - 1) * (M - m) ** (n - 2),
        0, d, lambda m: m + 1 - d, lambda m: 1.0,
    )
    assert oracles.range_gap_cdf(n, d) == pytest.approx(val, rel=1e-7)


def test_two_sample_fiber_tail_is_half_r_squared():
    for r in (0.05, 0.1, 0.2):
        assert oracles.fiber_tail(2, r) == pytest.approx(r * r / 2)
    assert oracles.fiber_tail(3, math.sqrt(3)) == 1.0
