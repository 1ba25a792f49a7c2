"""Flat ``key = value`` experiment files.

One pair per line, ``#`` starts a comment, lists are comma separated. Every error
carries the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

EXPERIMENTS = (
    "fiber_tail", "modulus_tail", "interval_prob", "gaussian_independence",
    "wegner", "partition", "smooth_theorem", "rcm_sweep", "full_suite",
)

_INT = {"n", "dim", "side", "trials", "seed", "workers", "cells"}
_FLOAT = {"a", "ell", "shape", "s", "delta", "alpha", "r", "interval_t", "interval_s", "mu_value"}
_STR = {"experiment", "marginal", "output", "mu_rule"}
_FLOAT_LIST = {"cover_breakpoints", "s_values"}
_INT_LIST = {"q_sizes"}

REQUIRED = {
    "fiber_tail": ("n", "r", "trials"),
    "modulus_tail": ("n", "s", "delta", "trials"),
    "interval_prob": ("n", "s", "trials"),
    "gaussian_independence": ("n", "trials"),
    "wegner": ("dim", "side", "trials"),
    "partition": ("n", "s", "trials"),
    "smooth_theorem": ("n", "alpha", "trials"),
    "rcm_sweep": ("alpha", "trials"),
    "full_suite": (),
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def workers(self) -> int:
        return int(self.values.get("workers", 1))


def _convert(key: str, raw: str, line: int):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _FLOAT_LIST:
            return [float(v) for v in raw.split(",") if v.strip()]
        if key in _INT_LIST:
            return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {key}", line) from None
    return raw


def parse_config(text: str) -> ExperimentConfig:
    values, lines = {}, {}
    known = _INT | _FLOAT | _STR | _FLOAT_LIST | _INT_LIST
    for no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", no)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", no)
        if not raw:
            raise ConfigError(f"empty value for {key}", no)
        values[key] = _convert(key, raw, no)
        lines[key] = no
    last = len(text.splitlines())
    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'", last)
    exp = values["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}", lines["experiment"])
    if "seed" not in values:
        raise ConfigError("missing required key 'seed' (there is no default seed)", last)
    if not 0 <= values["seed"] < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer", lines["seed"])
    for key in REQUIRED[exp]:
        if key not in values:
            raise ConfigError(f"experiment {exp} needs key {key!r}", last)
    if "trials" in values and values["trials"] < 1:
        raise ConfigError("trials must be >= 1", lines["trials"])
    return ExperimentConfig(exp, values["seed"], values, lines)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
