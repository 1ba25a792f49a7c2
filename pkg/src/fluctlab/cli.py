"""Command line entry point: ``fluctlab run | suite | print-bounds``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import experiments as ex
from .bounds import (
    gaussian_interval_bound,
    gaussian_trace_bound,
    lemma_densities_bound,
    lemma_prob_x_bound,
    rcm_uniform_params,
    thm_prob_nu_bound,
    thm_prob_nu_jl_bound,
)
from .config import ConfigError, ExperimentConfig, load_config
from .distributions import MarginalSpec
from .errors import FluctlabError
from .report import emit_report, exit_code

log = logging.getLogger("fluctlab")

EXIT_USAGE = 1


def _workers(default: int) -> int:
    env = os.environ.get("FLUCTLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FLUCTLAB_WORKERS must be an integer, got {env!r}") from None
    return default


def _marginal(cfg: ExperimentConfig, default: str = "uniform") -> MarginalSpec:
    return MarginalSpec(cfg.get("marginal", default), cfg.get("a", 0.0), cfg.get("ell", 1.0), cfg.get("shape", 0.0))


def dispatch(cfg: ExperimentConfig, workers: int):
    e, seed = cfg.experiment, cfg.seed
    T = cfg.get("trials")
    if e == "fiber_tail":
        return ex.fiber_tail(_marginal(cfg), cfg["n"], cfg["r"], T, seed, workers)
    if e == "modulus_tail":
        spec = _marginal(cfg)
        s, delta = cfg["s"], cfg["delta"]
        if not 0 < delta <= s <= spec.ell:
            raise ConfigError(f"modulus_tail needs 0 < delta <= s <= ell (got delta={delta}, s={s})",
                              cfg.lines.get("delta"))
        return ex.modulus_tail(spec, cfg["n"], s, delta, T, seed, workers)
    if e == "interval_prob":
        return ex.interval_prob(_marginal(cfg), cfg["n"], cfg["s"], T, seed, cfg.get("mu_rule", "eta-median"),
                                cfg.get("mu_value", 0.0), cfg.get("interval_t", 0.0), workers)
    if e == "gaussian_independence":
        return ex.gaussian_independence(cfg["n"], T, seed, workers)
    if e == "wegner":
        return ex.wegner(cfg["dim"], cfg["side"], _marginal(cfg, "gaussian"), T, seed,
                         cfg.get("interval_t"), cfg.get("interval_s", 0.05), workers)
    if e == "partition":
        return ex.partition(_marginal(cfg), cfg["n"], cfg["s"], T, seed, cfg.get("cover_breakpoints"),
                            cfg.get("cells", 2), cfg.get("mu_rule", "eta-median"), cfg.get("mu_value", 0.0), workers)
    if e == "smooth_theorem":
        spec = _marginal(cfg, "smooth")
        alpha = cfg["alpha"]
        if "s" in cfg.values:
            s = cfg["s"]
        elif "delta" in cfg.values:
            s = cfg["delta"] ** (1.0 / alpha)
        else:
            s = ex.smooth_delta(cfg["n"], spec.beta if spec.beta else 0.5, spec.ell) ** (1.0 / alpha)
        return ex.smooth_theorem(spec, cfg["n"], s, alpha, T, seed, workers)
    if e == "rcm_sweep":
        return ex.rcm_sweep(cfg.get("ell", 1.0), cfg["alpha"], cfg.get("q_sizes", list(ex.RCM_Q)),
                            cfg.get("s_values", list(ex.GRID_S)), T, seed, workers)
    if e == "full_suite":
        return ex.full_suite(seed, workers)
    raise ConfigError(f"unknown experiment {e!r}")


def _finish(reports, checks, prefix) -> int:
    try:
        csv_path, json_path = emit_report(reports, prefix, checks)
    except OSError as err:
        print(f"fluctlab: cannot write report: {err}", file=sys.stderr)
        return EXIT_USAGE
    code = exit_code(reports, checks)
    log.info("wrote %s and %s (%d reports, %d checks)", csv_path, json_path, len(reports), len(checks))
    for c in checks:
        if not c.passed:
            log.warning("check failed: %s value=%r tolerance=%r", c.name, c.value, c.tolerance)
    for r in reports:
        if r.verdict in ("violated", "inconclusive"):
            log.warning("%s %s: bound=%r frequency=%r", r.theorem, r.verdict, r.bound_value, r.empirical.frequency)
    return code


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        workers = _workers(cfg.workers)
        reports, checks = dispatch(cfg, workers)
    except OSError as err:
        print(f"fluctlab: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FluctlabError, ValueError) as err:
        print(f"fluctlab: {args.config}: {err}", file=sys.stderr)
        return EXIT_USAGE
    prefix = cfg.get("output") or str(Path(args.config).with_suffix(""))
    return _finish(reports, checks, prefix)


def cmd_suite(args) -> int:
    try:
        workers = _workers(args.workers)
    except ConfigError as err:
        print(f"fluctlab: {err}", file=sys.stderr)
        return EXIT_USAGE
    reports, checks = ex.full_suite(args.seed, workers)
    return _finish(reports, checks, args.out)


def cmd_print_bounds(args) -> int:
    n, ell, s, delta = args.n, args.ell, args.s, args.delta
    rows = [
        ("gaussian_interval  sqrt(N)|I|/sqrt(2pi), |I|=s", gaussian_interval_bound(n, s)),
        ("gaussian_trace     N^(3/2)|I|/sqrt(2pi), |I|=s", gaussian_trace_bound(n, s)),
        ("lemma_densities    r^2 N/(4 ell^2), r=sqrt(N) delta", lemma_densities_bound(n, math.sqrt(n) * delta, 1 / ell)),
    ]
    if 0 < delta <= ell:
        rows += [
            ("lemma_prob_x       N delta/ell", lemma_prob_x_bound(n, delta, ell)),
            ("thm_prob_nu        N delta/ell", thm_prob_nu_bound(n, delta, ell)),
            ("thm_prob_nu_jl     N^2 delta^2/(4 ell^2)", thm_prob_nu_jl_bound(n, delta, ell)),
        ]
    rows.append(("thm_densities      4 rho_bar^2 N^2 delta^2, rho_bar=1/ell", 4 * n**2 * delta**2 / ell**2))
    if args.alpha is not None:
        p = rcm_uniform_params(ell, args.alpha)
        rows.append((f"rcm threshold      C'|Q|^A' s^B' (alpha={args.alpha})", p.threshold(n, s)))
        rows.append(("rcm tail bound     C''|Q|^A'' s^B''", p.tail_bound(n, s)))
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        flag = "  (vacuous)" if value >= 1 else ""
        print(f"{name:<{width}}  {value:.17g}{flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluctlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", help="run the full desk-scale suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("print-bounds", help="print every closed-form bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=float, default=1.0)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_print_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
