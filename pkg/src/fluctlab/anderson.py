"""Finite-volume Anderson Hamiltonians ``-Laplacian + V`` on lattice cubes,
a cyclic Jacobi eigensolver, eigenvalue counting and Wegner-type experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .bounds import BoundReport, gaussian_trace_bound, trace_bound_from_modulus
from .decomposition import fiber_length
from .distributions import MarginalSpec, SampleVector
from .errors import DimensionError, SolverFailure
from .montecarlo import TailEstimate, run_chunks, sample_block
from .rng import stream_id

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-12


@dataclass(frozen=True)
class LatticeCube:
    dim: int
    side: int
    sites: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1 or self.side < 1:
            raise DimensionError(f"need dim >= 1 and side >= 1, got {self.dim}, {self.side}")
        object.__setattr__(self, "sites", tuple(np.ndindex(*(self.side,) * self.dim)))

    @property
    def size(self) -> int:
        return self.side**self.dim

    def laplacian(self) -> np.ndarray:
        """``-Laplacian`` with simple (Dirichlet) boundary: ``2d`` on the diagonal,
        ``-1`` between nearest neighbours inside the cube."""
        n, d, L = self.size, self.dim, self.side
        m = np.zeros((n, n))
        np.fill_diagonal(m, 2.0 * d)
        for i, site in enumerate(self.sites):
            for axis in range(d):
                if site[axis] + 1 < L:
                    j = i + L ** (d - 1 - axis)
                    m[i, j] = m[j, i] = -1.0
        return m


@dataclass(frozen=True)
class LatticeHamiltonian:
    cube: LatticeCube
    potential: np.ndarray
    matrix: np.ndarray

    @property
    def xi(self) -> float:
        return float(self.potential.mean())

    def fluctuation_part(self) -> np.ndarray:
        """``A = H - xi * I``; depends on the potential only through its fluctuations."""
        return self.matrix - self.xi * np.eye(self.cube.size)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    xi: float = 0.0

    @property
    def shifted(self) -> np.ndarray:
        return self.eigenvalues - self.xi


def build_hamiltonian(cube: LatticeCube, potential) -> LatticeHamiltonian:
    v = np.asarray(potential.values if isinstance(potential, SampleVector) else potential, dtype=float)
    if v.shape != (cube.size,):
        raise DimensionError(f"potential has {v.size} entries, cube has {cube.size} sites")
    h = cube.laplacian()
    h[np.diag_indices_from(h)] += v
    return LatticeHamiltonian(cube, v, h)


@nb.njit(cache=True, nogil=True)
def _jacobi(a, tol, max_sweeps):
    n = a.shape[0]
    frob = 0.0
    for i in range(n):
        for j in range(n):
            frob += a[i, j] * a[i, j]
    thresh = tol * math.sqrt(frob)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off < thresh or off == 0.0:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
    return -1


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = OFFDIAG_TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.

    Converged when every off-diagonal magnitude is below ``tol * ||A||_F``.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if _jacobi(a, tol, max_sweeps) < 0:
        raise SolverFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))


def eigen_decompose(h: LatticeHamiltonian) -> SpectralDecomposition:
    return SpectralDecomposition(jacobi_eigenvalues(h.matrix), h.xi)


def trace_projection(sd: SpectralDecomposition, t: float, s: float) -> int:
    """Number of eigenvalues in the closed interval ``[t, t + s]``."""
    ev = sd.eigenvalues
    return int(np.searchsorted(ev, t + s, side="right") - np.searchsorted(ev, t, side="left"))


@dataclass(frozen=True)
class ShiftReport:
    trials: int
    max_relative_deviation: float
    max_translation_change: float
    max_relative_translation_error: float

    def passed(self, tol: float = 1e-9) -> bool:
        return (
            self.max_relative_deviation <= tol
            and self.max_translation_change <= 1e-12
            and self.max_relative_translation_error <= 1e-10
        )


def verify_shift_identity(
    cube: LatticeCube, spec: MarginalSpec, trials: int, seed: int, shift: float = 0.75, workers: int = 1
) -> ShiftReport:
    """Per trial: diagonalize ``H`` and ``A = H - xi I`` separately and compare
    ``lambda_j`` with ``xi + mu_j``; also shift the potential by a constant and check
    that ``A`` is unchanged and every eigenvalue moves by the shift."""
    key = stream_id("shift-identity")

    def block(lo, hi):
        x = sample_block(spec, cube.size, seed, key, lo, hi)
        dev = change = tr_err = 0.0
        for v in x:
            h = build_hamiltonian(cube, v)
            frob = np.linalg.norm(h.matrix)
            lam = jacobi_eigenvalues(h.matrix)
            mu = jacobi_eigenvalues(h.fluctuation_part())
            dev = max(dev, float(np.max(np.abs(lam - (h.xi + mu)))) / frob)
            h2 = build_hamiltonian(cube, v + shift)
            change = max(change, float(np.max(np.abs(h2.fluctuation_part() - h.fluctuation_part()))))
            lam2 = jacobi_eigenvalues(h2.matrix)
            tr_err = max(tr_err, float(np.max(np.abs(lam2 - lam - shift))) / frob)
        return dev, change, tr_err

    parts = run_chunks(block, trials, workers)
    return ShiftReport(
        trials,
        max(p[0] for p in parts),
        max(p[1] for p in parts),
        max(p[2] for p in parts),
    )


def _interval_edges(t_lo: float, t_hi: float, length: float) -> np.ndarray:
    count = int(round((t_hi - t_lo) / length))
    return t_lo + length * np.arange(count)


def wegner_sweep(
    cube: LatticeCube,
    spec: MarginalSpec,
    t_lo: float,
    t_hi: float,
    length: float,
    trials: int,
    seed: int,
    workers: int = 1,
    stream: str = "wegner",
) -> list[BoundReport]:
    """Estimate P{tr P_I(H) >= 1} for consecutive closed intervals ``I = [t, t + length]``
    tiling ``[t_lo, t_hi]``, all from the same trials.

    Gaussian potentials are compared with ``|Lambda|^(3/2) |I| / sqrt(2 pi)``; compact
    marginals with ``|Lambda| * E[nu_N(|I|)]`` where the modulus is evaluated exactly on
    each trial's fiber.
    """
    if length <= 0:
        raise ValueError("interval length must be positive")
    starts = _interval_edges(t_lo, t_hi, length)
    n = cube.size
    key = stream_id(stream)
    lap = cube.laplacian()

    def block(lo, hi):
        x = sample_block(spec, n, seed, key, lo, hi)
        hits = np.zeros(len(starts), dtype=np.int64)
        for v in x:
            ev = jacobi_eigenvalues(lap + np.diag(v))
            cnt = np.searchsorted(ev, starts + length, side="right") - np.searchsorted(ev, starts, side="left")
            hits += cnt >= 1
        nu_sum = 0.0
        if spec.compact:
            flen = fiber_length(x.min(axis=1), x.max(axis=1), spec.ell, n)
            with np.errstate(divide="ignore"):
                nu = np.where(flen > 0, np.minimum(1.0, math.sqrt(n) * length / np.where(flen > 0, flen, 1.0)), 1.0)
            nu_sum = float(nu.sum())
        return hits, nu_sum

    parts = run_chunks(block, trials, workers)
    hits = np.sum([p[0] for p in parts], axis=0)
    reports = []
    base = {"dim": cube.dim, "side": cube.side, "n": n, "s": length, "kind": spec.kind}
    if spec.compact:
        nu_mean = math.fsum(p[1] for p in parts) / trials
        bound = trace_bound_from_modulus(n, nu_mean)
        theorem = "trace_modulus"
        base.update(ell=spec.ell, mean_modulus=nu_mean)
    else:
        bound = gaussian_trace_bound(n, length)
        theorem = "gaussian_trace"
    for t, h in zip(starts, hits):
        est = TailEstimate.from_counts(int(h), trials)
        reports.append(
            BoundReport(theorem, {**base, "interval_t": float(t), "trials": trials, "seed": seed}, bound, est.empirical())
        )
    return reports


def wegner_experiment(
    cube: LatticeCube, spec: MarginalSpec, interval: tuple[float, float], trials: int, seed: int, workers: int = 1
) -> BoundReport:
    """Single-interval version of :func:`wegner_sweep`; ``interval = (t, s)``."""
    t, s = interval
    return wegner_sweep(cube, spec, t, t + s, s, trials, seed, workers)[0]
