"""Closed-form tail bounds and the bookkeeping that compares them with Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .distributions import SmoothDensityConstants
from .errors import DeltaTooLarge, InvalidExponent, OutOfRange

SQRT_2PI = math.sqrt(2.0 * math.pi)

THEOREMS = (
    "gaussian_interval",
    "gaussian_trace",
    "trace_modulus",
    "lemma_prob_x",
    "lemma_densities",
    "thm_prob_nu",
    "thm_prob_nu_jl",
    "thm_densities",
    "rcm",
)
VERDICTS = ("holds", "holds-vacuously", "violated", "inconclusive")

# Slack, in Wilson half-widths, granted to an empirical frequency above its bound.
SLACK_HALF_WIDTHS = 3.0

DENSITIES_ERRATUM = (
    "bound evaluated as 4*rho_bar^2*N^2*delta^2 (no 1/ell^2 factor); "
    "the uniform case rho_bar = 1/ell restores the ell^-2 scaling"
)


def gaussian_interval_bound(n: int, length: float) -> float:
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    return math.sqrt(n) * length / SQRT_2PI


def gaussian_trace_bound(cube_size: int, length: float) -> float:
    if cube_size < 1:
        raise OutOfRange(f"cube size must be >= 1, got {cube_size}")
    return cube_size**1.5 * length / SQRT_2PI


def _check_delta(delta: float, ell: float, allow_zero: bool = False) -> None:
    if delta > ell:
        raise OutOfRange(f"delta={delta} exceeds ell={ell}")
    if delta < 0 or (delta == 0 and not allow_zero):
        raise OutOfRange(f"delta must be positive, got {delta}")


def lemma_prob_x_bound(n: int, delta: float, ell: float) -> float:
    _check_delta(delta, ell)
    return n * delta / ell


def lemma_densities_bound(n: int, r: float, rho_bar: float) -> float:
    if r < 0 or rho_bar <= 0:
        raise OutOfRange("need r >= 0 and rho_bar > 0")
    return 0.25 * rho_bar**2 * r**2 * n


def thm_prob_nu_bound(n: int, delta: float, ell: float) -> float:
    _check_delta(delta, ell)
    return n * delta / ell


def thm_prob_nu_jl_bound(n: int, delta: float, ell: float) -> float:
    _check_delta(delta, ell, allow_zero=True)
    return n**2 * delta**2 / (4.0 * ell**2)


def densities_delta_max(n: int, consts: SmoothDensityConstants) -> float:
    return consts.c_star * n**-1.5


def thm_densities_bound(n: int, delta: float, consts: SmoothDensityConstants) -> float:
    if not 0 < delta <= densities_delta_max(n, consts):
        raise DeltaTooLarge(
            f"delta={delta} outside (0, c_star * N^-3/2] = (0, {densities_delta_max(n, consts)}]"
        )
    return 4.0 * consts.rho_bar**2 * n**2 * delta**2


def trace_bound_from_modulus(cube_size: int, nu: float) -> float:
    if not 0 <= nu <= 1:
        raise OutOfRange(f"modulus must lie in [0, 1], got {nu}")
    return cube_size * nu


@dataclass(frozen=True)
class RcmParameters:
    """Exponents and prefactors of P{nu_|Q|(s) >= C'|Q|^A' s^B'} <= C''|Q|^A'' s^B''."""

    c_prime: float
    a_prime: float
    b_prime: float
    c_double: float
    a_double: float
    b_double: float

    def __post_init__(self):
        positive = (self.c_prime, self.b_prime, self.c_double, self.a_double, self.b_double)
        if any(not p > 0 for p in positive) or self.a_prime < 0:
            raise ValueError(f"invalid RCM parameters {self}")

    def threshold(self, q_size: int, s: float) -> float:
        return self.c_prime * q_size**self.a_prime * s**self.b_prime

    def tail_bound(self, q_size: int, s: float) -> float:
        return self.c_double * q_size**self.a_double * s**self.b_double


def rcm_uniform_params(ell: float, alpha: float) -> RcmParameters:
    if not 0 < alpha < 1:
        raise InvalidExponent(f"alpha must lie in (0, 1), got {alpha}")
    if not ell > 0:
        raise OutOfRange(f"ell must be positive, got {ell}")
    return RcmParameters(
        c_prime=1.0,
        a_prime=0.0,
        b_prime=1.0 - alpha,
        c_double=1.0 / (4.0 * ell**2),
        a_double=2.0,
        b_double=2.0 * alpha,
    )


def rcm_check(params: RcmParameters, q_size: int, s: float, empirical_tail: float, slack: float = 0.0) -> str:
    if not 0 <= empirical_tail <= 1:
        raise OutOfRange(f"empirical tail must lie in [0, 1], got {empirical_tail}")
    return "holds" if empirical_tail <= params.tail_bound(q_size, s) + slack else "violated"


@dataclass(frozen=True)
class Empirical:
    frequency: float
    trials: int
    wilson_low: float
    wilson_high: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.wilson_high - self.wilson_low)


def verdict_for(bound: float, emp: Optional[Empirical]) -> str:
    """holds-vacuously when bound >= 1; violated only when the whole Wilson
    interval lies above the bound; holds when the frequency is within
    SLACK_HALF_WIDTHS half-widths of the bound; otherwise inconclusive."""
    if emp is None:
        return "inconclusive"
    if emp.wilson_low > bound:
        return "violated"
    if bound >= 1.0:
        return "holds-vacuously"
    if emp.frequency <= bound + SLACK_HALF_WIDTHS * emp.half_width:
        return "holds"
    return "inconclusive"


@dataclass
class BoundReport:
    theorem: str
    params: dict
    bound_value: float
    empirical: Optional[Empirical] = None
    verdict: str = field(default="inconclusive")
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        self.verdict = verdict_for(self.bound_value, self.empirical)

    @property
    def vacuous(self) -> bool:
        return self.bound_value >= 1.0
