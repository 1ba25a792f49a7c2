import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from fluctlab.decomposition import (
    Fiber,
    conditional_interval_probability,
    decompose,
    fiber,
    modulus,
    modulus_ratio,
    xi_tilde_range,
)
from fluctlab.distributions import MarginalSpec, SampleVector
from fluctlab.errors import FiberUndefined
from fluctlab.montecarlo import sample_block

UNIT = MarginalSpec("uniform", 0.0, 1.0)


def sv(values, spec=UNIT):
    return SampleVector(np.array(values, dtype=float), spec)


def test_decompose_symmetric_sample():
    fr = decompose(sv([0.2, 0.4, 0.6]))
    assert fr.xi == pytest.approx(0.4)
    np.testing.assert_allclose(fr.etas, [-0.2, 0.0, 0.2], atol=1e-15)
    assert fr.xi_tilde == pytest.approx(0.4 * math.sqrt(3))


def test_decompose_constant_sample():
    fr = decompose(sv([0.3] * 5))
    assert fr.xi == pytest.approx(0.3)
    assert np.all(np.abs(fr.etas) < 1e-15) and np.all(fr.ys == 0)


def test_decompose_difference():
    assert decompose(sv([1.0, 0.0])).ys[0] == 1.0


samples = npst.arrays(np.float64, st.integers(2, 12), elements=st.floats(0, 1))


@given(samples)
def test_frame_invariants(values):
    x = sv(values)
    fr = decompose(x)
    assert abs(fr.etas.sum()) <= 1e-12 * len(values) * max(1.0, np.abs(values).max())
    assert fr.xi_tilde == pytest.approx(math.sqrt(len(values)) * fr.xi, rel=1e-15, abs=1e-300)
    np.testing.assert_array_equal(fr.ys, values[:-1] - values[-1])
    order = np.argsort(values, kind="stable")
    assert np.all(np.diff(fr.etas[order]) >= 0)


@given(samples, st.floats(-5, 5))
def test_fluctuation_differences_are_translation_invariant(values, t):
    base = sv(values, MarginalSpec("gaussian"))
    moved = sv(values + t, MarginalSpec("gaussian"))
    np.testing.assert_allclose(decompose(moved).ys, decompose(base).ys, atol=1e-12)


def test_translation_invariance_exact_for_dyadic_shift():
    x = np.array([0.125, 0.5, 0.75, 0.25])
    np.testing.assert_array_equal(decompose(sv(x + 0.0625)).ys, decompose(sv(x)).ys)


def test_fiber_examples():
    assert fiber(sv([0.5, 0.5])).length == pytest.approx(math.sqrt(2))
    assert fiber(sv([1.0, 0.0])).length == 0.0
    assert fiber(sv([0.3] * 4)).length == pytest.approx(2.0)


def test_fiber_on_shifted_support():
    spec = MarginalSpec("uniform", 2.0, 3.0)
    f = fiber(sv([2.5, 4.0], spec))
    assert (f.ymin, f.ymax) == (0.5, 2.0)
    assert f.length == pytest.approx(math.sqrt(2) * 1.5)


def test_fiber_undefined_for_gaussian():
    with pytest.raises(FiberUndefined):
        fiber(sv([0.1, 0.2], MarginalSpec("gaussian")))


@given(samples)
def test_fiber_length_bounds(values):
    f = fiber(sv(values))
    assert 0.0 <= f.length <= math.sqrt(len(values)) + 1e-12
    assert (f.length == 0.0) == (values.max() - values.min() == 1.0)


def test_fiber_length_constant_along_fiber():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 10))
        x = rng.random(n)
        base = fiber(sv(x)).length
        lo, hi = -x.min(), 1.0 - x.max()
        for u in rng.uniform(lo, hi, 100):
            assert fiber(sv(x + u)).length == pytest.approx(base, abs=1e-12)


def test_modulus_examples():
    assert modulus(Fiber(0.5, 0.5, 1.0, 2, math.sqrt(2)), 0.1) == pytest.approx(0.1)
    assert modulus(Fiber(0.0, 1.0, 1.0, 2, 0.0), 0.01) == 1.0
    assert modulus(Fiber(0.3, 0.3, 1.0, 4, 2.0), 0.5) == pytest.approx(0.5)
    assert modulus_ratio(0.0, 0.1, 2) == math.inf


@given(st.floats(1e-3, 2.0), st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
def test_modulus_is_monotone(length, s1, s2):
    f = Fiber(0.0, 0.0, 1.0, 4, length)
    lo, hi = sorted((s1, s2))
    assert modulus(f, lo) <= modulus(f, hi)
    assert 0.0 <= modulus(f, hi) <= 1.0


def test_conditional_interval_probability_examples():
    x = sv([0.5, 0.5])
    assert conditional_interval_probability(x, 0.0, 1.0) == pytest.approx(1.0)
    assert conditional_interval_probability(x, 0.0, 0.1) == pytest.approx(0.1)
    deg = sv([1.0, 0.0])
    assert conditional_interval_probability(deg, 0.5, 0.01) == 1.0
    assert conditional_interval_probability(deg, 0.6, 0.01) == 0.0


def test_sup_of_conditional_probability_is_the_modulus():
    x = sample_block(UNIT, 5, 3, 0, 0, 100)
    for row in x:
        v = sv(row)
        f = fiber(v)
        for s in (0.01, 0.1):
            lo, hi = xi_tilde_range(v)
            n = len(row)
            ts = np.linspace(lo / math.sqrt(n) - s, hi / math.sqrt(n), 1000)
            # the best window starts at the lower end of the range; include it exactly
            ts = np.append(ts, lo / math.sqrt(n))
            best = max(conditional_interval_probability(v, t, s) for t in ts)
            assert best == pytest.approx(modulus(f, s), abs=1e-9)
