"""Experiment drivers. Each returns ``(reports, checks)`` ready for :func:`emit_report`."""

from __future__ import annotations

import math

import numpy as np

from . import oracles
from .anderson import LatticeCube, jacobi_eigenvalues, verify_shift_identity, wegner_sweep
from .bounds import (
    BoundReport,
    gaussian_interval_bound,
    lemma_densities_bound,
    lemma_prob_x_bound,
    rcm_uniform_params,
    thm_prob_nu_bound,
    thm_prob_nu_jl_bound,
)
from .decomposition import decompose, fiber, modulus
from .distributions import MarginalSpec, SampleVector, smooth_constants
from .montecarlo import (
    TailEstimate,
    TrialPlan,
    conditional_uniformity_ks,
    estimate_fiber_tail,
    estimate_interval_probability,
    estimate_modulus_tail,
    estimate_threshold_tail,
    gaussian_independence_check,
    run_chunks,
    sample_block,
)
from .partition import SupportCover, verify_partition_inequality
from .report import Check
from .rng import stream_id
from .smoothdensity import fiber_density, grid_points_for, modulus_smooth, thm_densities_experiment

GRID_N = (2, 4, 8, 16)
GRID_S = (0.01, 0.05)
RCM_Q = (4, 9, 16)
RCM_ALPHA = 1.0 / 3.0
SMOOTH_ALPHA = 0.75


def _wilson_contains(est: TailEstimate, value: float) -> bool:
    return est.wilson_low <= value <= est.wilson_high


def fiber_tail(spec: MarginalSpec, n: int, r: float, trials: int, seed: int, workers: int = 1):
    """Frequency of ``|fiber| <= r`` against the fiber-length lemmas, with the exact
    order-statistics value when the marginal is uniform."""
    plan = TrialPlan(spec, n, trials, seed=seed, target="fiber_tail", stream=f"fiber-tail/{n}")
    est = estimate_fiber_tail(plan, r, workers)
    rho_bar = smooth_constants(spec).rho_bar
    params = {"n": n, "ell": spec.ell, "r": r, "seed": seed, "kind": spec.kind}
    reports = [BoundReport("lemma_densities", params, lemma_densities_bound(n, r, rho_bar), est.empirical())]
    if 0 < r <= spec.ell:
        reports.append(
            BoundReport("lemma_prob_x", {**params, "delta": r}, lemma_prob_x_bound(n, r, spec.ell), est.empirical())
        )
    checks = []
    if spec.kind == "uniform" or spec.beta == 0.0:
        exact = oracles.fiber_tail(n, r, spec.ell)
        checks.append(
            Check("fiber_tail_exact", params, est.frequency, exact, _wilson_contains(est, exact),
                  {"wilson_low": est.wilson_low, "wilson_high": est.wilson_high})
        )
    return reports, checks


def modulus_tail(spec: MarginalSpec, n: int, s: float, delta: float, trials: int, seed: int, workers: int = 1):
    """Frequency of ``nu_N(s) >= s / delta`` against both uniform-marginal theorems,
    and the raw fiber tail ``|fiber| <= sqrt(N) delta`` against the fiber-length lemma."""
    plan = TrialPlan(spec, n, trials, s=s, delta=delta, seed=seed, target="modulus_tail", stream=f"modulus/{n}")
    est = estimate_modulus_tail(plan, workers)
    params = {"n": n, "ell": spec.ell, "s": s, "delta": delta, "seed": seed}
    reports = [
        BoundReport("thm_prob_nu", params, thm_prob_nu_bound(n, delta, spec.ell), est.empirical()),
        BoundReport("thm_prob_nu_jl", params, thm_prob_nu_jl_bound(n, delta, spec.ell), est.empirical()),
    ]
    r = math.sqrt(n) * delta
    raw = estimate_fiber_tail(plan, r, workers)
    reports.append(
        BoundReport(
            "lemma_densities",
            {**params, "r": r},
            lemma_densities_bound(n, r, 1.0 / spec.ell),
            raw.empirical(),
            notes={"exact": oracles.fiber_tail(n, r, spec.ell)},
        )
    )
    return reports, []


def interval_prob(
    spec: MarginalSpec, n: int, s: float, trials: int, seed: int,
    mu_rule: str = "eta-median", mu_value: float = 0.0, interval_t: float = 0.0, workers: int = 1,
):
    """Gaussian marginal: frequency of ``xi_N in [interval_t, interval_t + s]`` against the
    Gaussian density bound. Compact marginals: frequency of ``xi_N in [mu, mu + s]`` for a
    fluctuation-measurable ``mu``, checked against the exact Bates law when ``mu`` is constant
    and the marginal uniform."""
    params = {"n": n, "s": s, "seed": seed, "kind": spec.kind}
    if not spec.compact:
        key = stream_id(f"gaussian-interval/{n}")

        def count(lo, hi):
            xi = sample_block(spec, n, seed, key, lo, hi).mean(axis=1)
            return int(np.count_nonzero((xi >= interval_t) & (xi <= interval_t + s)))

        est = TailEstimate.from_counts(sum(run_chunks(count, trials, workers)), trials)
        rep = BoundReport("gaussian_interval", {**params, "interval_t": interval_t},
                          gaussian_interval_bound(n, s), est.empirical())
        return [rep], []
    plan = TrialPlan(spec, n, trials, s=s, seed=seed, target="interval_prob", stream=f"interval/{n}")
    est = estimate_interval_probability(plan, mu_rule, mu_value, workers)
    checks = []
    if mu_rule == "constant" and spec.kind == "uniform":
        exact = oracles.mean_interval_probability(n, mu_value, mu_value + s, spec.a, spec.ell)
        checks.append(Check("interval_prob_exact", {**params, "mu": mu_value}, est.frequency, exact,
                            _wilson_contains(est, exact),
                            {"wilson_low": est.wilson_low, "wilson_high": est.wilson_high}))
    else:
        checks.append(Check("interval_prob", {**params, "mu_rule": mu_rule}, est.frequency, 1.0,
                            0.0 <= est.frequency <= 1.0, {"hits": est.hits}))
    return [], checks


def gaussian_independence(n: int, trials: int, seed: int, workers: int = 1):
    rep = gaussian_independence_check(n, trials, seed, workers=workers, stream=f"gaussian-independence/{n}")
    check = Check(
        "gaussian_independence",
        {"n": n, "trials": trials, "seed": seed, "bins": rep.bins},
        rep.max_abs_corr,
        rep.corr_limit,
        rep.passed,
        {"correlations": list(rep.correlations), "chi2_pvalue": rep.chi2_pvalue},
    )
    return [], [check]


def fiber_uniformity(seed: int, accepted: int = 100_000, band=(0.3, 0.31)):
    ks = conditional_uniformity_ks(2, accepted, seed, band)
    return [], [Check("fiber_uniformity", {"n": 2, "accepted": accepted, "band": list(band), "seed": seed},
                      ks, 0.02, ks <= 0.02)]


def chain_spectrum(max_side: int = 16):
    """Jacobi eigenvalues of the free Dirichlet chain against ``2 - 2 cos(k pi / (L + 1))``."""
    worst = 0.0
    for side in range(2, max_side + 1):
        ev = jacobi_eigenvalues(LatticeCube(1, side).laplacian())
        k = np.arange(1, side + 1)
        exact = np.sort(2.0 - 2.0 * np.cos(k * np.pi / (side + 1)))
        worst = max(worst, float(np.max(np.abs(ev - exact))))
    return [], [Check("jacobi_chain_spectrum", {"max_side": max_side}, worst, 1e-10, worst <= 1e-10)]


def shift_identity(dim: int, side: int, spec: MarginalSpec, trials: int, seed: int, workers: int = 1):
    rep = verify_shift_identity(LatticeCube(dim, side), spec, trials, seed, workers=workers)
    return [], [
        Check(
            "shift_identity",
            {"dim": dim, "side": side, "trials": trials, "seed": seed, "kind": spec.kind},
            rep.max_relative_deviation,
            1e-9,
            rep.passed(),
            {"max_translation_change": rep.max_translation_change,
             "max_relative_translation_error": rep.max_relative_translation_error},
        )
    ]


def wegner(dim: int, side: int, spec: MarginalSpec, trials: int, seed: int,
           interval_t: float | None = None, interval_s: float = 0.05, workers: int = 1):
    """Sweep of consecutive intervals of length ``interval_s`` over ``[-3, 3 + 4d]``, or a
    single interval when ``interval_t`` is given."""
    cube = LatticeCube(dim, side)
    if interval_t is None:
        lo, hi = -3.0, 3.0 + 4.0 * dim
    else:
        lo, hi = interval_t, interval_t + interval_s
    reps = wegner_sweep(cube, spec, lo, hi, interval_s, trials, seed, workers, stream=f"wegner/{dim}/{side}")
    return reps, []


def partition(spec: MarginalSpec, n: int, s: float, trials: int, seed: int, breakpoints=None, cells: int = 2,
              mu_rule: str = "eta-median", mu_value: float = 0.0, workers: int = 1):
    cover = SupportCover(tuple(breakpoints)) if breakpoints else SupportCover.dyadic(spec, int(round(math.log2(cells))))
    plan = TrialPlan(spec, n, trials, s=s, seed=seed, target="interval_prob", stream=f"partition/{n}/{cover.size}")
    rep = verify_partition_inequality(plan, cover, mu_rule, mu_value, workers)
    params = {"n": n, "s": s, "cells": cover.size, "mu_rule": mu_rule, "trials": trials, "seed": seed}
    checks = [
        Check("partition_count_identity", params, float(rep.unconditional), float(rep.weighted),
              rep.count_identity and rep.unconditional == rep.weighted,
              {"hits": rep.hits, "box_hits_total": sum(rep.box_hits.values())}),
        Check("partition_weighted_le_sup", params, float(rep.weighted), float(rep.sup), rep.weighted_le_sup,
              {"occupied_boxes": len(rep.box_trials), "low_occupancy_boxes": len(rep.low_occupancy)}),
    ]
    if mu_rule == "constant" and spec.kind == "uniform":
        exact = oracles.mean_interval_probability(n, mu_value, mu_value + s, spec.a, spec.ell)
        est = rep.estimate()
        checks.append(Check("partition_unconditional_exact", {**params, "mu": mu_value}, est.frequency, exact,
                            _wilson_contains(est, exact),
                            {"wilson_low": est.wilson_low, "wilson_high": est.wilson_high}))
    return [], checks


def smooth_uniform_agreement(n: int, s: float, seed: int, fibers: int = 100):
    """Largest gap between the profile-based modulus at shape 0 and the closed form."""
    spec = MarginalSpec("smooth", 0.0, 1.0, 0.0)
    x = sample_block(spec, n, seed, stream_id("smooth-uniform-agreement"), 0, fibers)
    worst = 0.0
    for row in x:
        sv = SampleVector(row, spec)
        f = fiber(sv)
        prof = fiber_density(decompose(sv), spec, grid_points_for(f.length, n, s))
        worst = max(worst, abs(modulus_smooth(prof, s) - modulus(f, s)))
    return worst


def smooth_theorem(spec: MarginalSpec, n: int, s: float, alpha: float, trials: int, seed: int, workers: int = 1):
    res = thm_densities_experiment(spec, n, s, alpha, trials, seed, workers, stream=f"smooth/{n}/{spec.beta}")
    params = dict(res.report.params)
    checks = [Check("densities_inclusion", params, float(res.inclusion_counterexamples), 0.0,
                    res.inclusion_counterexamples == 0)]
    if spec.beta == 0.0:
        gap = smooth_uniform_agreement(n, s, seed)
        checks.append(Check("smooth_uniform_agreement", {"n": n, "s": s, "fibers": 100}, gap, 1e-9, gap <= 1e-9))
    return [res.report], checks


def smooth_delta(n: int, shape: float = 0.5, ell: float = 1.0, fraction: float = 0.9) -> float:
    """``fraction * c_star * N^-3/2`` for the smooth family with the given shape."""
    return fraction * smooth_constants(MarginalSpec("smooth", 0.0, ell, shape)).c_star * n**-1.5


def rcm_sweep(ell: float, alpha: float, q_sizes, s_values, trials: int, seed: int, workers: int = 1):
    """Frequency of ``nu_|Q|(s) >= C'|Q|^A' s^B'`` against ``C''|Q|^A'' s^B''`` for the
    uniform-marginal parameters."""
    spec = MarginalSpec("uniform", 0.0, ell)
    params = rcm_uniform_params(ell, alpha)
    reports = []
    for q in q_sizes:
        for s in s_values:
            plan = TrialPlan(spec, q, trials, s=s, seed=seed, target="rcm_sweep", stream=f"rcm/{q}")
            est = estimate_threshold_tail(plan, params.threshold(q, s), workers)
            reports.append(BoundReport(
                "rcm",
                {"n": q, "ell": ell, "s": s, "delta": s**alpha, "alpha": alpha, "seed": seed,
                 "threshold": params.threshold(q, s), "exact": oracles.range_gap_cdf(q, s**alpha, ell)},
                params.tail_bound(q, s),
                est.empirical(),
            ))
    return reports, []


def full_suite(seed: int, workers: int = 1):
    """Every desk-scale check, in a fixed order."""
    uni = MarginalSpec("uniform", 0.0, 1.0)
    gauss = MarginalSpec("gaussian")
    reports, checks = [], []

    def add(result):
        reports.extend(result[0])
        checks.extend(result[1])

    for r in (0.05, 0.1, 0.2):
        add(fiber_tail(uni, 2, r, 100_000, seed, workers))
    for n in GRID_N:
        for s in GRID_S:
            for delta in (s / 10, s / 2):
                add(modulus_tail(uni, n, s, delta, 100_000, seed, workers))
    add(fiber_uniformity(seed))
    add(gaussian_independence(4, 100_000, seed, workers))
    add(gaussian_independence(2, 100_000, seed, workers))
    add(interval_prob(gauss, 4, 0.1, 100_000, seed, interval_t=0.0, workers=workers))
    add(chain_spectrum(16))
    add(shift_identity(1, 8, gauss, 1000, seed, workers))
    for dim, side in ((1, 4), (1, 8), (2, 4)):
        add(wegner(dim, side, gauss, 10_000, seed, workers=workers))
    for n in (2, 4):
        for cells in (2, 4):
            add(partition(uni, n, 0.1, 100_000, seed, cells=cells, workers=workers))
    add(partition(uni, 2, 0.1, 100_000, seed, cells=2, mu_rule="constant", mu_value=0.4, workers=workers))
    delta = smooth_delta(4)
    s = delta ** (1.0 / SMOOTH_ALPHA)
    for shape in (0.0, 0.5):
        add(smooth_theorem(MarginalSpec("smooth", 0.0, 1.0, shape), 4, s, SMOOTH_ALPHA, 10_000, seed, workers))
    add(rcm_sweep(1.0, RCM_ALPHA, RCM_Q, GRID_S, 100_000, seed, workers))
    return reports, checks
