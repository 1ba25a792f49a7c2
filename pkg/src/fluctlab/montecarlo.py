"""Monte Carlo estimation of fiber and modulus tails.

Trials are processed in fixed chunks of ``CHUNK`` trials. Each trial reads its own
window of the counter-based stream, chunk results are integer counts (or per-chunk
sums gathered in chunk order), so the outcome does not depend on ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.special import ndtri

from .bounds import Empirical
from .decomposition import fiber_length
from .distributions import MarginalSpec, quantile
from .errors import FiberUndefined, InvalidSampleSize, OutOfRange
from .rng import block_uniforms, chunk_bounds, stream_id

CHUNK = 8192
Z95 = 1.959963984540054

TARGETS = ("fiber_tail", "modulus_tail", "interval_prob", "trace_event", "rcm_sweep")
MU_RULES = ("constant", "eta-median", "eta-max")


@dataclass(frozen=True)
class TrialPlan:
    spec: MarginalSpec
    n: int
    trials: int
    s: float = 0.1
    delta: float = 0.05
    seed: int = 0
    target: str = "fiber_tail"
    stream: str = "main"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.n < 2:
            raise InvalidSampleSize(f"need n >= 2, got {self.n}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")

    @property
    def stream_key(self) -> int:
        return stream_id(self.stream)


@dataclass(frozen=True)
class TailEstimate:
    hits: int
    trials: int
    frequency: float
    wilson_low: float
    wilson_high: float

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "TailEstimate":
        lo, hi = wilson_interval(hits, trials)
        return cls(int(hits), int(trials), hits / trials, lo, hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.wilson_high - self.wilson_low)

    def empirical(self) -> Empirical:
        return Empirical(self.frequency, self.trials, self.wilson_low, self.wilson_high)


def wilson_interval(hits: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError(f"need 0 <= hits <= trials and trials >= 1, got {hits}/{trials}")
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, centre - half)
    hi = 1.0 if hits == trials else min(1.0, centre + half)
    return lo, hi


def run_chunks(func: Callable[[int, int], object], trials: int, workers: int = 1) -> list:
    """Apply ``func(lo, hi)`` to every fixed chunk; results come back in chunk order."""
    bounds = chunk_bounds(trials, CHUNK)
    if workers <= 1 or len(bounds) == 1:
        return [func(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: func(*b), bounds))


def sample_block(spec: MarginalSpec, n: int, seed: int, stream: int, lo: int, hi: int) -> np.ndarray:
    """Samples for trials ``lo..hi-1`` as an array of shape ``(hi - lo, n)``."""
    return quantile(spec, block_uniforms(seed, stream, lo, hi, n))


def plan_block(plan: TrialPlan, lo: int, hi: int) -> np.ndarray:
    return sample_block(plan.spec, plan.n, plan.seed, plan.stream_key, lo, hi)


def block_fiber_lengths(plan: TrialPlan, x: np.ndarray) -> np.ndarray:
    if not plan.spec.compact:
        raise FiberUndefined("fiber tails need a compactly supported marginal")
    return fiber_length(x.min(axis=1), x.max(axis=1), plan.spec.ell, plan.n)


def block_modulus(plan: TrialPlan, x: np.ndarray, s: float, clamped: bool = True) -> np.ndarray:
    """Per-trial modulus for the uniform marginal: ``sqrt(N) s / |fiber|``."""
    length = block_fiber_lengths(plan, x)
    with np.errstate(divide="ignore"):
        ratio = np.where(length > 0, math.sqrt(plan.n) * s / np.where(length > 0, length, 1.0), np.inf)
    return np.minimum(ratio, 1.0) if clamped else ratio


def fiber_tail_hits(plan: TrialPlan, r: float, lo: int, hi: int) -> np.ndarray:
    return block_fiber_lengths(plan, plan_block(plan, lo, hi)) <= r


def modulus_tail_hits(plan: TrialPlan, threshold: float, lo: int, hi: int, clamped: bool = True) -> np.ndarray:
    return block_modulus(plan, plan_block(plan, lo, hi), plan.s, clamped) >= threshold


def _count(mask_fn: Callable[[int, int], np.ndarray], trials: int, workers: int) -> int:
    return sum(run_chunks(lambda lo, hi: int(np.count_nonzero(mask_fn(lo, hi))), trials, workers))


def estimate_fiber_tail(plan: TrialPlan, r: float, workers: int = 1) -> TailEstimate:
    """Frequency of ``|fiber| <= r``."""
    hits = _count(lambda lo, hi: fiber_tail_hits(plan, r, lo, hi), plan.trials, workers)
    return TailEstimate.from_counts(hits, plan.trials)


def estimate_threshold_tail(plan: TrialPlan, threshold: float, workers: int = 1, clamped: bool = True) -> TailEstimate:
    """Frequency of ``nu_N(s) >= threshold`` with ``s = plan.s``."""
    hits = _count(lambda lo, hi: modulus_tail_hits(plan, threshold, lo, hi, clamped), plan.trials, workers)
    return TailEstimate.from_counts(hits, plan.trials)


def estimate_modulus_tail(plan: TrialPlan, workers: int = 1, clamped: bool = True) -> TailEstimate:
    """Frequency of ``nu_N(s) >= s / delta``.

    With ``clamped=True`` the modulus is the conditional probability itself (at most 1),
    so for ``delta < s`` the event is empty. ``clamped=False`` uses the raw ratio, for
    which the event is exactly ``|fiber| <= sqrt(N) delta``.
    """
    ell = plan.spec.ell
    if not 0 < plan.delta <= plan.s <= ell:
        raise OutOfRange(f"need 0 < delta <= s <= ell, got delta={plan.delta}, s={plan.s}, ell={ell}")
    return estimate_threshold_tail(plan, plan.s / plan.delta, workers, clamped)


def mu_tilde(x: np.ndarray, spec: MarginalSpec, s: float, rule: str = "eta-median", value: float = 0.0) -> np.ndarray:
    """A left endpoint computed from the fluctuations only (never from the mean itself).

    constant   : ``value``
    eta-median : ``a + ell/2 + median(eta)``
    eta-max    : ``a + ell - max(eta) - s``, the top window of the fiber's mean range
    """
    if rule == "constant":
        return np.full(x.shape[0], float(value))
    eta = x - x.mean(axis=1, keepdims=True)
    if rule == "eta-median":
        return spec.a + 0.5 * spec.ell + np.median(eta, axis=1)
    if rule == "eta-max":
        return spec.a + spec.ell - eta.max(axis=1) - s
    raise ValueError(f"unknown mu rule {rule!r}; expected one of {MU_RULES}")


def interval_hits(x: np.ndarray, spec: MarginalSpec, s: float, rule: str, value: float) -> np.ndarray:
    mu = mu_tilde(x, spec, s, rule, value)
    xi = x.mean(axis=1)
    return (xi >= mu) & (xi <= mu + s)


def estimate_interval_probability(
    plan: TrialPlan, mu_rule: str = "eta-median", mu_value: float = 0.0, workers: int = 1
) -> TailEstimate:
    """Frequency of ``xi_N in [mu, mu + s]`` for a fluctuation-measurable ``mu``."""
    if not plan.spec.compact:
        raise FiberUndefined("interval probabilities are defined here for compact marginals")
    if plan.s <= 0:
        return TailEstimate.from_counts(0, plan.trials)

    def count(lo, hi):
        return int(np.count_nonzero(interval_hits(plan_block(plan, lo, hi), plan.spec, plan.s, mu_rule, mu_value)))

    return TailEstimate.from_counts(sum(run_chunks(count, plan.trials, workers)), plan.trials)


@dataclass(frozen=True)
class IndependenceReport:
    n: int
    trials: int
    correlations: tuple
    corr_limit: float
    chi2_pvalue: float
    bins: int

    @property
    def max_abs_corr(self) -> float:
        return max(abs(c) for c in self.correlations)

    @property
    def passed(self) -> bool:
        return self.max_abs_corr <= self.corr_limit and self.chi2_pvalue > 1e-3


def gaussian_independence_check(
    n: int, trials: int, seed: int, bins: int = 20, workers: int = 1, stream: str = "gaussian-independence"
) -> IndependenceReport:
    """Correlation of the mean with each fluctuation, and a chi-square test that the law
    of the mean is the same above and below the median fluctuation norm."""
    if n < 2:
        raise InvalidSampleSize("the fluctuations need n >= 2")
    spec = MarginalSpec("gaussian")
    key = stream_id(stream)

    def block(lo, hi):
        x = sample_block(spec, n, seed, key, lo, hi)
        xi = x.mean(axis=1)
        return xi, x - xi[:, None]

    parts = run_chunks(block, trials, workers)
    xi = np.concatenate([p[0] for p in parts])
    eta = np.concatenate([p[1] for p in parts])
    corrs = tuple(float(np.corrcoef(xi, eta[:, i])[0, 1]) for i in range(n))
    norm = np.linalg.norm(eta, axis=1)
    upper = norm > np.median(norm)
    edges = ndtri(np.arange(1, bins) / bins) / math.sqrt(n)
    idx = np.searchsorted(edges, xi)
    table = np.vstack([np.bincount(idx[upper], minlength=bins), np.bincount(idx[~upper], minlength=bins)])
    pvalue = float(stats.chi2_contingency(table)[1])
    return IndependenceReport(n, trials, corrs, 3.0 / math.sqrt(trials), pvalue, bins)


def conditional_uniformity_ks(
    n: int,
    accepted: int,
    seed: int,
    band: Sequence[float] = (0.3, 0.31),
    ell: float = 1.0,
    stream: str = "fiber-uniformity",
) -> float:
    """KS distance between the fiber positions of samples whose spread ``max - min``
    lies in ``band`` and the uniform law. Samples are drawn in fixed chunks until
    ``accepted`` of them fall in the band."""
    spec = MarginalSpec("uniform", 0.0, ell)
    key = stream_id(stream)
    lo_b, hi_b = band
    positions = []
    got, start = 0, 0
    while got < accepted:
        x = sample_block(spec, n, seed, key, start, start + CHUNK * 8)
        start += CHUNK * 8
        xmin, xmax = x.min(axis=1), x.max(axis=1)
        keep = ((xmax - xmin) >= lo_b) & ((xmax - xmin) <= hi_b)
        x, xmin, xmax = x[keep], xmin[keep], xmax[keep]
        xi = x.mean(axis=1)
        lo = xi - xmin
        hi = xi + ell - xmax
        positions.append((xi - lo) / (hi - lo))
        got += len(xi)
    pos = np.concatenate(positions)[:accepted]
    return float(stats.kstest(pos, "uniform").statistic)
