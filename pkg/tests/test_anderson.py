import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from fluctlab.anderson import (
    LatticeCube,
    SpectralDecomposition,
    build_hamiltonian,
    eigen_decompose,
    jacobi_eigenvalues,
    trace_projection,
    verify_shift_identity,
    wegner_experiment,
    wegner_sweep,
)
from fluctlab.distributions import MarginalSpec
from fluctlab.errors import DimensionError, SolverFailure


def test_build_examples():
    h = build_hamiltonian(LatticeCube(1, 2), [0.0, 0.0])
    np.testing.assert_array_equal(h.matrix, [[2, -1], [-1, 2]])
    h = build_hamiltonian(LatticeCube(1, 3), [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.diag(h.matrix), [3, 4, 5])
    np.testing.assert_array_equal(h.matrix, h.matrix.T)
    assert np.count_nonzero(h.matrix - np.diag(np.diag(h.matrix))) == 4
    h = build_hamiltonian(LatticeCube(2, 2), np.zeros(4))
    assert np.all(np.diag(h.matrix) == 4)
    assert np.all((h.matrix != 0).sum(axis=1) - 1 == 2)


@pytest.mark.parametrize("dim,side", [(1, 5), (2, 3), (3, 3)])
def test_hamiltonian_structure(dim, side):
    cube = LatticeCube(dim, side)
    h = build_hamiltonian(cube, np.arange(cube.size, dtype=float))
    off = h.matrix - np.diag(np.diag(h.matrix))
    assert np.array_equal(h.matrix, h.matrix.T)
    assert set(np.unique(off)) <= {0.0, -1.0}
    assert np.all((off != 0).sum(axis=1) <= 2 * dim)


def test_size_mismatch():
    with pytest.raises(DimensionError):
        build_hamiltonian(LatticeCube(1, 3), [0.0, 1.0])


def test_eigen_examples():
    np.testing.assert_allclose(jacobi_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1, 1], atol=1e-15)
    ev = eigen_decompose(build_hamiltonian(LatticeCube(1, 3), np.zeros(3))).eigenvalues
    np.testing.assert_allclose(ev, [2 - math.sqrt(2), 2, 2 + math.sqrt(2)], atol=1e-12)
    np.testing.assert_allclose(jacobi_eigenvalues(np.diag([0.9, 0.1, 0.5])), [0.1, 0.5, 0.9])


@pytest.mark.parametrize("side", range(2, 17))
def test_free_chain_spectrum(side):
    ev = jacobi_eigenvalues(LatticeCube(1, side).laplacian())
    k = np.arange(1, side + 1)
    exact = np.sort(2 - 2 * np.cos(k * np.pi / (side + 1)))
    assert np.max(np.abs(ev - exact)) <= 1e-10


@settings(max_examples=50)
@given(npst.arrays(np.float64, (6, 6), elements=st.floats(-10, 10)))
def test_jacobi_agrees_with_lapack(a):
    m = a + a.T
    np.testing.assert_allclose(jacobi_eigenvalues(m), np.linalg.eigvalsh(m), atol=1e-9 * max(1.0, np.linalg.norm(m)))


def test_solver_failure_reported():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(8, 8))
    with pytest.raises(SolverFailure):
        jacobi_eigenvalues(m + m.T, max_sweeps=0)


def test_shift_identity_and_translation():
    rep = verify_shift_identity(LatticeCube(1, 8), MarginalSpec("gaussian"), 200, 3)
    assert rep.passed()
    zero = build_hamiltonian(LatticeCube(1, 4), np.zeros(4))
    sd = eigen_decompose(zero)
    assert sd.xi == 0.0
    np.testing.assert_array_equal(sd.eigenvalues, sd.shifted)


def test_translation_covariance():
    rng = np.random.default_rng(1)
    cube = LatticeCube(2, 3)
    v = rng.normal(size=cube.size)
    h, h2 = build_hamiltonian(cube, v), build_hamiltonian(cube, v + 1.25)
    frob = np.linalg.norm(h.matrix)
    np.testing.assert_allclose(eigen_decompose(h2).eigenvalues - 1.25, eigen_decompose(h).eigenvalues,
                               atol=1e-10 * frob)
    np.testing.assert_allclose(h2.fluctuation_part(), h.fluctuation_part(), atol=1e-12)


def test_trace_projection_examples():
    sd = SpectralDecomposition(np.array([0.1, 0.5, 0.9]))
    assert trace_projection(sd, 0.0, 0.5) == 2
    assert trace_projection(sd, 0.3, 0.0) == 0
    assert trace_projection(sd, -10, 20) == 3


@given(st.floats(-3, 3), st.floats(0, 2), st.floats(0, 2))
def test_trace_projection_is_monotone(t, s, extra):
    sd = SpectralDecomposition(np.sort(np.random.default_rng(2).normal(size=10)))
    assert trace_projection(sd, t, s) <= trace_projection(sd, t, s + extra)
    assert trace_projection(sd, t, s) <= trace_projection(sd, t - extra, s + extra)


def test_wegner_gaussian_chain():
    reps = wegner_sweep(LatticeCube(1, 4), MarginalSpec("gaussian"), -3.0, 7.0, 0.05, 10_000, 4)
    assert len(reps) == 200
    bound = 8 * 0.05 / math.sqrt(2 * math.pi)
    assert reps[0].bound_value == pytest.approx(bound)
    assert all(r.empirical.frequency <= bound + 3 * r.empirical.half_width for r in reps)


def test_wegner_limits():
    cube, spec = LatticeCube(1, 4), MarginalSpec("gaussian")
    assert wegner_experiment(cube, spec, (1.0, 1e-12), 2000, 5).empirical.frequency == 0.0
    big = wegner_experiment(cube, spec, (-50.0, 100.0), 2000, 5)
    assert big.empirical.frequency == 1.0 and big.verdict == "holds-vacuously"


def test_wegner_uniform_uses_modulus_bound():
    rep = wegner_experiment(LatticeCube(1, 4), MarginalSpec("uniform", 0.0, 1.0), (2.0, 0.05), 5000, 6)
    assert rep.theorem == "trace_modulus"
    assert 0 < rep.bound_value <= 4
    assert rep.empirical.frequency <= rep.bound_value + 3 * rep.empirical.half_width
