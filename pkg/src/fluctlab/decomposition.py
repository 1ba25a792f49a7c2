"""Mean / fluctuation decomposition and the fibers of the fluctuation map.

For a sample ``X`` on the cube ``[a, a + ell]^N`` the fluctuations ``eta_i = X_i - xi``
are invariant under ``X -> X + t(1, ..., 1)``. The set of admissible samples sharing
the same fluctuations is a segment (the fiber) whose length, measured in the
rescaled mean ``xi_tilde = sqrt(N) * xi``, is ``sqrt(N) * (ell - max X + min X)``.
Under the uniform marginal the conditional law of ``xi_tilde`` is uniform on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import SampleVector
from .errors import FiberUndefined


@dataclass(frozen=True)
class FluctuationFrame:
    xi: float
    xi_tilde: float
    etas: np.ndarray
    ys: np.ndarray

    @property
    def n(self) -> int:
        return len(self.etas)


@dataclass(frozen=True)
class Fiber:
    ymin: float
    ymax: float
    ell: float
    n: int
    length: float

    @property
    def degenerate(self) -> bool:
        return self.length == 0.0


def decompose(x: SampleVector) -> FluctuationFrame:
    v = x.values
    xi = float(v.mean())
    return FluctuationFrame(
        xi=xi,
        xi_tilde=math.sqrt(x.n) * xi,
        etas=v - xi,
        ys=v[:-1] - v[-1],
    )


def fiber_length(ymin, ymax, ell: float, n: int):
    """Closed-form fiber length; broadcasts over arrays of extremes."""
    gap = np.maximum(ell - (np.asarray(ymax) - np.asarray(ymin)), 0.0)
    return math.sqrt(n) * gap


def fiber(x: SampleVector) -> Fiber:
    spec = x.spec
    if not spec.compact:
        raise FiberUndefined("fibers need a compactly supported marginal")
    v = x.values - spec.a
    lo, hi = float(v.min()), float(v.max())
    return Fiber(ymin=lo, ymax=hi, ell=spec.ell, n=x.n, length=float(fiber_length(lo, hi, spec.ell, x.n)))


def xi_tilde_range(x: SampleVector) -> tuple[float, float]:
    """Range of the rescaled mean along the fiber through ``x``."""
    spec = x.spec
    if not spec.compact:
        raise FiberUndefined("fibers need a compactly supported marginal")
    v = x.values
    xi = float(v.mean())
    rn = math.sqrt(x.n)
    return rn * (xi - (v.min() - spec.a)), rn * (xi + (spec.a + spec.ell - v.max()))


def fiber_position(x: SampleVector) -> float:
    """Relative position in [0, 1] of ``x`` along its fiber (0.5 for a degenerate fiber).

    For the uniform marginal this is Unif[0, 1] conditionally on the fluctuations.
    """
    lo, hi = xi_tilde_range(x)
    if hi <= lo:
        return 0.5
    return (math.sqrt(x.n) * float(x.values.mean()) - lo) / (hi - lo)


def modulus_ratio(length, s: float, n: int):
    """Unclamped ratio ``sqrt(N) s / |fiber|``; ``inf`` on degenerate fibers."""
    length = np.asarray(length, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(length > 0, math.sqrt(n) * s / np.where(length > 0, length, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def modulus(f: Fiber, s: float) -> float:
    """Conditional continuity modulus of the sample mean on the fiber ``f``
    for the uniform marginal. Equals 1 on a degenerate fiber."""
    if not s > 0:
        raise ValueError(f"window length must be positive, got {s}")
    if f.length == 0.0:
        return 1.0
    return min(1.0, math.sqrt(f.n) * s / f.length)


def conditional_interval_probability(x: SampleVector, t: float, s: float) -> float:
    """P{xi in [t, t + s] | fluctuations}, evaluated on the fiber through ``x``."""
    spec = x.spec
    if not spec.compact:
        raise FiberUndefined("fibers need a compactly supported marginal")
    if spec.kind == "smooth" and spec.beta != 0.0:
        from .smoothdensity import interval_probability_smooth

        return interval_probability_smooth(x, t, s)
    lo, hi = xi_tilde_range(x)
    if hi <= lo:
        xi = float(x.values.mean())
        return 1.0 if t <= xi <= t + s else 0.0
    rn = math.sqrt(x.n)
    overlap = min(hi, rn * (t + s)) - max(lo, rn * t)
    return min(1.0, max(0.0, overlap / (hi - lo)))
