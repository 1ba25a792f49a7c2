"""Conditional law of the rescaled mean along a fiber for a smooth positive marginal.

Along the fiber through ``X`` the sample is ``X_j = eta_j + t / sqrt(N)`` with
``t = xi_tilde``, and the conditional density of ``t`` is proportional to
``prod_j rho(eta_j + t / sqrt(N))``. The profile is tabulated on a uniform grid and
integrated with the trapezoid rule; window integrals use the exact integral of the
piecewise-linear interpolant, so constant profiles are integrated without error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import DENSITIES_ERRATUM, BoundReport, densities_delta_max, thm_densities_bound
from .decomposition import FluctuationFrame, decompose, fiber_length
from .distributions import MarginalSpec, SampleVector, SmoothDensityConstants, density_at, smooth_constants
from .errors import DeltaTooLarge, FiberUndefined, PointMassFiber, PreconditionNotMet
from .montecarlo import TailEstimate, run_chunks, sample_block
from .rng import stream_id

NODES_PER_WINDOW = 32


@dataclass(frozen=True)
class FiberDensityProfile:
    frame: FluctuationFrame
    grid: np.ndarray
    weights: np.ndarray
    z: float

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def length(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    def cumulative(self) -> np.ndarray:
        p, h = self.weights, self.spacing
        return np.concatenate(([0.0], np.cumsum(0.5 * h * (p[1:] + p[:-1]))))


def grid_points_for(length: float, n: int, s: float, per_window: int = NODES_PER_WINDOW) -> int:
    """Smallest grid with spacing at most ``sqrt(N) s / per_window``."""
    return max(2, int(math.ceil(length * per_window / (math.sqrt(n) * s))) + 1)


def fiber_density(frame: FluctuationFrame, spec: MarginalSpec, grid_points: int) -> FiberDensityProfile:
    if not spec.compact:
        raise FiberUndefined("fiber densities need a compactly supported marginal")
    n = frame.n
    rn = math.sqrt(n)
    t_lo = rn * (spec.a - frame.etas.min())
    t_hi = rn * (spec.a + spec.ell - frame.etas.max())
    if not t_hi > t_lo:
        raise PointMassFiber("the fiber is a single point")
    grid = np.linspace(t_lo, t_hi, max(2, int(grid_points)))
    pts = np.clip(frame.etas[None, :] + grid[:, None] / rn, spec.a, spec.a + spec.ell)
    weights = np.exp(np.log(density_at(spec, pts)).sum(axis=1))
    h = grid[1] - grid[0]
    z = float(np.sum(0.5 * h * (weights[1:] + weights[:-1])))
    return FiberDensityProfile(frame, grid, weights, z)


def _partial_from(p: np.ndarray, k, d, h: float):
    """Integral of the linear interpolant over ``[t_k, t_k + d]``, ``0 <= d <= h``."""
    return p[k] * d + (p[k + 1] - p[k]) * d * d / (2.0 * h)


def _window_sup(p: np.ndarray, h: float, width: float) -> float:
    """Largest integral of the piecewise-linear profile over a window of ``width``,
    over windows that start or end on a grid node."""
    m = len(p)
    c = np.concatenate(([0.0], np.cumsum(0.5 * h * (p[1:] + p[:-1]))))
    q = int(math.floor(width / h))
    f = width - q * h
    if q >= m - 1:
        return c[-1]
    if f <= 1e-12 * h:
        return float(np.max(c[q:] - c[: m - q]))
    i = np.arange(0, m - q - 1)
    starts = c[i + q] - c[i] + _partial_from(p, i + q, f, h)
    j = np.arange(q + 1, m)
    k = j - q - 1
    tail = p[k + 1] * f - (p[k + 1] - p[k]) * f * f / (2.0 * h)
    ends = c[j] - c[j - q] + tail
    return float(max(starts.max(), ends.max()))


def modulus_smooth(profile: FiberDensityProfile, s: float) -> float:
    """Sup over windows of xi_tilde-width ``sqrt(N) s`` of the conditional probability."""
    width = math.sqrt(profile.frame.n) * s
    if width >= profile.length:
        return 1.0
    return min(1.0, _window_sup(profile.weights, profile.spacing, width) / profile.z)


def _integral_to(profile: FiberDensityProfile, u: float, c: np.ndarray) -> float:
    g, h = profile.grid, profile.spacing
    if u <= g[0]:
        return 0.0
    if u >= g[-1]:
        return float(c[-1])
    k = min(int((u - g[0]) / h), len(g) - 2)
    return float(c[k] + _partial_from(profile.weights, k, u - g[k], h))


def interval_probability_smooth(x: SampleVector, t: float, s: float, grid_points: int | None = None) -> float:
    """P{xi in [t, t + s] | fluctuations} on the fiber through ``x``."""
    frame = decompose(x)
    spec = x.spec
    length = float(fiber_length(x.values.min(), x.values.max(), spec.ell, x.n))
    if length == 0.0:
        return 1.0 if t <= frame.xi <= t + s else 0.0
    if grid_points is None:
        grid_points = max(grid_points_for(length, x.n, s), 4097)
    prof = fiber_density(frame, spec, grid_points)
    c = prof.cumulative()
    rn = math.sqrt(x.n)
    mass = _integral_to(prof, rn * (t + s), c) - _integral_to(prof, rn * t, c)
    return min(1.0, max(0.0, mass / prof.z))


@dataclass(frozen=True)
class DensityRatioReport:
    ratio: float
    max_log_derivative: float
    log_derivative_limit: float
    window: tuple

    @property
    def passed(self) -> bool:
        return 0.25 <= self.ratio <= 4.0 and self.max_log_derivative <= self.log_derivative_limit


def density_ratio_check(profile: FiberDensityProfile, consts: SmoothDensityConstants) -> DensityRatioReport:
    """Flatness of the fiber density next to its maximum.

    On a window of length ``ell_N = ell_star / N`` adjacent to the argmax the ratio
    max/min must lie in [1/4, 4], and the discrete log-derivative along the fiber is
    bounded by ``1.05 * C_1 * sqrt(N)``.
    """
    n = profile.frame.n
    if n < 4:
        raise PreconditionNotMet(f"needs N >= 4, got {n}")
    g, p = profile.grid, profile.weights
    ell_n = consts.ell_star / n
    if math.isfinite(ell_n) and profile.length < 2.0 * ell_n:
        raise PreconditionNotMet(f"fiber length {profile.length} < 2 ell_N = {2 * ell_n}")
    logp = np.log(p)
    max_dlog = float(np.max(np.abs(np.diff(logp))) / profile.spacing)
    limit = 1.05 * consts.c1 * math.sqrt(n)
    k = int(np.argmax(p))
    if not math.isfinite(ell_n):
        lo, hi = g[0], g[-1]
    elif g[k] - ell_n >= g[0]:
        lo, hi = g[k] - ell_n, g[k]
    else:
        lo, hi = g[k], g[k] + ell_n
    inside = (g >= lo) & (g <= hi)
    w = p[inside]
    return DensityRatioReport(float(w.max() / w.min()), max_dlog, limit, (float(lo), float(hi)))


@dataclass(frozen=True)
class DensitiesResult:
    report: BoundReport
    estimate: TailEstimate
    inclusion_counterexamples: int
    delta: float


def _profile_modulus(x: np.ndarray, spec: MarginalSpec, s: float) -> tuple[float, float]:
    sv = SampleVector(x, spec)
    length = float(fiber_length(x.min(), x.max(), spec.ell, len(x)))
    if length == 0.0:
        return 1.0, 0.0
    prof = fiber_density(decompose(sv), spec, grid_points_for(length, len(x), s))
    return modulus_smooth(prof, s), length


def thm_densities_experiment(
    spec: MarginalSpec,
    n: int,
    s: float,
    alpha: float,
    trials: int,
    seed: int,
    workers: int = 1,
    stream: str = "smooth-theorem",
) -> DensitiesResult:
    """Frequency of ``nu_N(s) >= s / delta`` with ``delta = s^alpha`` against
    ``4 rho_bar^2 N^2 delta^2``, plus a per-trial check of the inclusion
    ``{nu_N(s) >= s / delta} subset {|fiber| <= 4 sqrt(N) delta}``."""
    consts = smooth_constants(spec)
    delta = s**alpha
    if delta > densities_delta_max(n, consts):
        raise DeltaTooLarge(f"delta = s^alpha = {delta} exceeds c_star N^-3/2 = {densities_delta_max(n, consts)}")
    bound = thm_densities_bound(n, delta, consts)
    threshold = s / delta
    key = stream_id(stream)

    def block(lo, hi):
        x = sample_block(spec, n, seed, key, lo, hi)
        hits = bad = 0
        for row in x:
            nu, length = _profile_modulus(row, spec, s)
            if nu >= threshold:
                hits += 1
                bad += length > 4.0 * math.sqrt(n) * delta
        return hits, bad

    parts = run_chunks(block, trials, workers)
    est = TailEstimate.from_counts(sum(p[0] for p in parts), trials)
    bad = sum(p[1] for p in parts)
    params = {
        "n": n, "ell": spec.ell, "shape": spec.beta, "s": s, "delta": delta, "alpha": alpha,
        "trials": trials, "seed": seed, "rho_bar": consts.rho_bar, "c_star": consts.c_star,
    }
    report = BoundReport(
        "thm_densities", params, bound, est.empirical(),
        notes={"erratum": DENSITIES_ERRATUM, "inclusion_counterexamples": bad},
    )
    return DensitiesResult(report, est, bad, delta)
