import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fluctlab.distributions import (
    MarginalSpec,
    SampleVector,
    cdf,
    density_at,
    quantile,
    sample,
    smooth_constants,
)
from fluctlab.errors import DensityNotPositive, InvalidSampleSize
from fluctlab.montecarlo import sample_block
from fluctlab.rng import Stream


def test_uniform_sample_in_support():
    x = sample(MarginalSpec("uniform", 0.0, 1.0), 3, Stream(7, 0))
    assert x.n == 3
    assert np.all((x.values >= 0) & (x.values <= 1))


def test_gaussian_sample_is_deterministic():
    spec = MarginalSpec("gaussian")
    a, b = sample(spec, 2, Stream(7, 0)), sample(spec, 2, Stream(7, 0))
    np.testing.assert_array_equal(a.values, b.values)


def test_sample_size_must_be_at_least_two():
    with pytest.raises(InvalidSampleSize):
        sample(MarginalSpec(), 1, Stream(0, 0))
    with pytest.raises(InvalidSampleSize):
        SampleVector([0.5], MarginalSpec())


def test_smooth_shape_zero_is_uniform_in_distribution():
    x = sample_block(MarginalSpec("smooth", 0.0, 1.0, 0.0), 2, 7, 0, 0, 50_000).ravel()
    assert stats.kstest(x, "uniform").statistic <= 0.01


def test_density_examples():
    assert density_at(MarginalSpec("uniform", 0.0, 2.0), 1.0) == 0.5
    sm = MarginalSpec("smooth", 0.0, 1.0, 0.5)
    assert density_at(sm, 0.0) == pytest.approx(0.5)
    assert density_at(sm, 1.0) == pytest.approx(1.5)
    assert density_at(MarginalSpec("uniform", 0.0, 1.0), -0.1) == 0.0


@pytest.mark.parametrize(
    "spec",
    [
        MarginalSpec("uniform", 0.0, 1.0),
        MarginalSpec("uniform", -2.0, 3.0),
        MarginalSpec("smooth", 0.0, 1.0, 0.5),
        MarginalSpec("smooth", 1.0, 2.0, -0.9),
    ],
)
def test_density_integrates_to_one(spec):
    v = np.linspace(spec.a, spec.a + spec.ell, 10_000)
    assert abs(np.trapezoid(density_at(spec, v), v) - 1.0) <= 1e-6


def test_uniform_mean_and_gaussian_variance():
    ell = 2.0
    u = sample_block(MarginalSpec("uniform", 0.0, ell), 2, 3, 0, 0, 50_000).ravel()
    assert abs(u.mean() - ell / 2) <= 4 * (ell / math.sqrt(12)) / math.sqrt(u.size)
    g = sample_block(MarginalSpec("gaussian"), 2, 3, 0, 0, 50_000).ravel()
    assert abs(g.var() - 1.0) <= 0.05


@given(st.floats(-0.99, 0.99), st.floats(1e-6, 1 - 1e-6))
def test_smooth_quantile_inverts_cdf(beta, p):
    spec = MarginalSpec("smooth", 0.3, 1.7, beta)
    assert cdf(spec, quantile(spec, p)) == pytest.approx(p, abs=1e-12)


def test_smooth_constants_examples():
    c = smooth_constants(MarginalSpec("smooth", 0.0, 1.0, 0.5))
    assert (c.rho_star, c.rho_bar, c.c_rho_prime, c.c1, c.ell_star, c.c_star) == pytest.approx(
        (0.5, 1.5, 1.0, 2.0, 0.5, 0.25)
    )
    flat = smooth_constants(MarginalSpec("smooth", 0.0, 1.0, 0.0))
    assert flat.c_rho_prime == 0 and math.isinf(flat.c_star)
    assert math.isinf(smooth_constants(MarginalSpec("uniform")).c_star)
    # c_star = ell_star / 2 = 1 / (2 C_1) = 1/18 for shape 0.9 on a support of length 2.
    c = smooth_constants(MarginalSpec("smooth", 0.0, 2.0, 0.9))
    assert (c.rho_star, c.rho_bar, c.c_rho_prime, c.c1) == pytest.approx((0.05, 0.95, 0.45, 9.0))
    assert c.c_star == pytest.approx(1 / 18)
    assert c.ell_star * c.c1 == pytest.approx(1.0)
    assert c.rho_star <= c.rho_bar


def test_nonpositive_smooth_density_rejected():
    with pytest.raises(DensityNotPositive):
        MarginalSpec("smooth", 0.0, 1.0, 1.0)


def test_spec_round_trips_through_dict():
    spec = MarginalSpec("smooth", 0.5, 2.0, -0.25)
    assert MarginalSpec.from_dict(spec.to_dict()) == spec
