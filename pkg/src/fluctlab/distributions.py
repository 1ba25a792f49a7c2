"""Marginal laws of the i.i.d. potential and reproducible sampling.

Three kinds are supported: the standard Gaussian, ``Unif[a, a + ell]`` and the
built-in smooth family

    rho(v) = (1 + shape * (2 * (v - a) / ell - 1)) / ell   on [a, a + ell],

which is strictly positive for ``|shape| < 1`` and reduces to the uniform law at
``shape = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DensityNotPositive, InvalidSampleSize
from .rng import Stream

KINDS = ("gaussian", "uniform", "smooth")


@dataclass(frozen=True)
class MarginalSpec:
    kind: str = "uniform"
    a: float = 0.0
    ell: float = 1.0
    shape: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown marginal kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "gaussian" and not self.ell > 0:
            raise ValueError(f"support length must be positive, got {self.ell}")
        if self.kind == "smooth" and not abs(self.shape) < 1:
            raise DensityNotPositive(f"|shape| must be < 1 for a positive density, got {self.shape}")

    @property
    def compact(self) -> bool:
        return self.kind != "gaussian"

    @property
    def beta(self) -> float:
        return self.shape if self.kind == "smooth" else 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "ell": self.ell, "shape": self.shape}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalSpec":
        return cls(
            kind=str(d.get("kind", "uniform")),
            a=float(d.get("a", 0.0)),
            ell=float(d.get("ell", 1.0)),
            shape=float(d.get("shape", 0.0)),
        )


@dataclass(frozen=True)
class SmoothDensityConstants:
    rho_star: float
    rho_bar: float
    c_rho_prime: float
    c1: float
    ell_star: float
    c_star: float


@dataclass(frozen=True)
class SampleVector:
    values: np.ndarray
    spec: MarginalSpec
    n: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("sample values must be one-dimensional")
        if values.size < 2:
            raise InvalidSampleSize(f"need at least 2 values, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", int(values.size))


def density_at(spec: MarginalSpec, v):
    """Density of the marginal at ``v`` (scalar or array)."""
    v = np.asarray(v, dtype=float)
    if spec.kind == "gaussian":
        out = np.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)
    else:
        u = (v - spec.a) / spec.ell
        inside = (u >= 0.0) & (u <= 1.0)
        out = np.where(inside, (1.0 + spec.beta * (2.0 * u - 1.0)) / spec.ell, 0.0)
    return float(out) if out.ndim == 0 else out


def cdf(spec: MarginalSpec, v):
    v = np.asarray(v, dtype=float)
    if spec.kind == "gaussian":
        out = ndtr(v)
    else:
        u = np.clip((v - spec.a) / spec.ell, 0.0, 1.0)
        b = spec.beta
        out = b * u * u + (1.0 - b) * u
    return float(out) if out.ndim == 0 else out


def quantile(spec: MarginalSpec, p):
    """Inverse CDF. For the smooth family this solves ``b u^2 + (1 - b) u = p``
    in the cancellation-free form ``u = 2p / ((1 - b) + sqrt((1 - b)^2 + 4bp))``."""
    p = np.asarray(p, dtype=float)
    if spec.kind == "gaussian":
        return ndtri(p)
    b = spec.beta
    if b == 0.0:
        u = p
    else:
        u = 2.0 * p / ((1.0 - b) + np.sqrt((1.0 - b) ** 2 + 4.0 * b * p))
    return spec.a + spec.ell * u


def sample(spec: MarginalSpec, n: int, stream: Stream) -> SampleVector:
    if n < 2:
        raise InvalidSampleSize(f"need n >= 2, got {n}")
    return SampleVector(quantile(spec, stream.uniforms(n)), spec)


def smooth_constants(spec: MarginalSpec) -> SmoothDensityConstants:
    if spec.kind == "gaussian":
        raise ValueError("smooth constants need a compactly supported marginal")
    b = abs(spec.beta)
    if b >= 1:
        raise DensityNotPositive(f"|shape| must be < 1, got {spec.beta}")
    ell = spec.ell
    rho_star = (1.0 - b) / ell
    rho_bar = (1.0 + b) / ell
    c_rho_prime = 2.0 * b / ell**2
    c1 = c_rho_prime / rho_star
    ell_star = math.inf if c1 == 0.0 else 1.0 / c1
    return SmoothDensityConstants(
        rho_star=rho_star,
        rho_bar=rho_bar,
        c_rho_prime=c_rho_prime,
        c1=c1,
        ell_star=ell_star,
        c_star=ell_star / 2.0,
    )
