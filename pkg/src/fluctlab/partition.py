"""Covers of the marginal support by intervals, product boxes of the sample space,
and the conditional decomposition of interval probabilities over those boxes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .distributions import MarginalSpec, SampleVector, cdf
from .errors import UncoveredSample
from .montecarlo import TailEstimate, TrialPlan, interval_hits, plan_block, run_chunks, wilson_interval

MIN_OCCUPANCY = 100


@dataclass(frozen=True)
class SupportCover:
    """Consecutive cells ``[b_k, b_{k+1}]`` given by increasing breakpoints."""

    breakpoints: tuple

    def __post_init__(self):
        b = tuple(float(v) for v in self.breakpoints)
        if len(b) < 2 or any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise ValueError(f"breakpoints must be strictly increasing with at least 2 entries: {b}")
        object.__setattr__(self, "breakpoints", b)

    @classmethod
    def dyadic(cls, spec: MarginalSpec, m: int = 1) -> "SupportCover":
        return cls(tuple(np.linspace(spec.a, spec.a + spec.ell, 2**m + 1)))

    @property
    def size(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def cells(self) -> list[tuple[float, float]]:
        b = self.breakpoints
        return list(zip(b, b[1:]))

    def cell_index(self, values) -> np.ndarray:
        """Cell of each value; a value on a shared endpoint goes to the lower cell."""
        v = np.asarray(values, dtype=float)
        b = np.asarray(self.breakpoints)
        if np.any(v < b[0]) or np.any(v > b[-1]):
            raise UncoveredSample(f"values outside the cover [{b[0]}, {b[-1]}]")
        return np.maximum(np.searchsorted(b, v, side="left") - 1, 0)

    def box_id(self, x: np.ndarray) -> np.ndarray:
        """Mixed-radix code of the box of each row of ``x``."""
        idx = self.cell_index(x)
        weights = self.size ** np.arange(x.shape[-1] - 1, -1, -1)
        return idx @ weights


@dataclass(frozen=True)
class BoxIndex:
    ks: tuple


def assign_box(x: SampleVector, cover: SupportCover) -> BoxIndex:
    return BoxIndex(tuple(int(k) for k in cover.cell_index(x.values)))


def cell_masses(cover: SupportCover, spec: MarginalSpec) -> np.ndarray:
    return np.diff(cdf(spec, np.asarray(cover.breakpoints)))


def box_probability(box: BoxIndex, cover: SupportCover, spec: MarginalSpec) -> float:
    masses = cell_masses(cover, spec)
    if any(not 0 <= k < cover.size for k in box.ks):
        raise ValueError(f"box {box.ks} has an index outside the cover")
    return float(np.prod(masses[list(box.ks)]))


@dataclass(frozen=True)
class PartitionReport:
    trials: int
    hits: int
    box_trials: dict
    box_hits: dict
    unconditional: Fraction
    weighted: Fraction
    sup: Fraction
    low_occupancy: tuple

    @property
    def count_identity(self) -> bool:
        return self.hits == sum(self.box_hits.values()) and self.trials == sum(self.box_trials.values())

    @property
    def weighted_le_sup(self) -> bool:
        return self.weighted <= self.sup

    def box_wilson(self) -> dict:
        return {k: wilson_interval(self.box_hits[k], n) for k, n in self.box_trials.items()}

    def estimate(self) -> TailEstimate:
        return TailEstimate.from_counts(self.hits, self.trials)


def verify_partition_inequality(
    plan: TrialPlan,
    cover: SupportCover,
    mu_rule: str = "eta-median",
    mu_value: float = 0.0,
    workers: int = 1,
) -> PartitionReport:
    """From one stream of trials: (a) the unconditional frequency of
    ``xi in [mu, mu + s]``, (b) the box-weighted sum of conditional frequencies with
    empirical box weights, and (c) the largest conditional frequency over occupied boxes.
    All three are exact rationals, so (a) == (b) and (b) <= (c) are checked exactly."""
    n_boxes = cover.size**plan.n

    def block(lo, hi):
        x = plan_block(plan, lo, hi)
        ids = cover.box_id(x)
        hit = interval_hits(x, plan.spec, plan.s, mu_rule, mu_value) if plan.s > 0 else np.zeros(len(x), bool)
        return np.bincount(ids, minlength=n_boxes), np.bincount(ids[hit], minlength=n_boxes)

    parts = run_chunks(block, plan.trials, workers)
    occ = np.sum([p[0] for p in parts], axis=0)
    hit = np.sum([p[1] for p in parts], axis=0)
    box_trials = {int(k): int(occ[k]) for k in np.flatnonzero(occ)}
    box_hits = {k: int(hit[k]) for k in box_trials}
    total_hits = int(hit.sum())
    T = plan.trials
    weighted = sum((Fraction(box_trials[k], T) * Fraction(box_hits[k], box_trials[k]) for k in box_trials), Fraction(0))
    sup = max(Fraction(box_hits[k], box_trials[k]) for k in box_trials)
    low = tuple(k for k, nk in box_trials.items() if nk < MIN_OCCUPANCY)
    return PartitionReport(T, total_hits, box_trials, box_hits, Fraction(total_hits, T), weighted, sup, low)


def default_cover(spec: MarginalSpec, breakpoints: Sequence[float] | None = None, m: int = 1) -> SupportCover:
    return SupportCover(tuple(breakpoints)) if breakpoints else SupportCover.dyadic(spec, m)
