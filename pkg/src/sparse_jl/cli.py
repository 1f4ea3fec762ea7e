"""Command-line interface.

Every command prints a table (CSV, JSON or an aligned text layout) preceded
by the full resolved configuration, so any output file can be regenerated
from its own header. Exit codes: 0 success, 1 verification failure, 2 usage
or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .data_io import FORMATS, dispersion_profile, empirical_distortion_profile, load
from .embedding import VARIANTS, sample_matrix
from .moments import DomainError
from .row_bound import BoundParams, ratio_grid
from .tail_bounds import (
    FAMILIES,
    SparsityRule,
    confidence_at_epsilon,
    epsilon_bound,
    epsilon_bound_detail,
    min_dimension,
    min_sparsity,
    union_bound_dimension,
)
from .verify import CHECKS, check_decoupling, check_majorization, check_moments, check_row_bound, check_tail

__all__ = ["main", "build_parser", "RunConfig", "Report", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
THREADS_ENV = "SPARSE_JL_THREADS"
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
OUTPUT_FORMATS = ("csv", "json", "pretty")

log = logging.getLogger("sparse_jl")


@dataclass
class RunConfig:
    """Resolved invocation: command path, every flag, and output settings."""

    command: str
    flags: dict
    output: str | None
    format: str
    seed: int
    threads: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Report:
    """What a command produced: a table, scalar summary and a verdict."""

    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool = True


class UsageError(ValueError):
    """Flag values that parse but make no sense together."""


# ---------------------------------------------------------------- formatting


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return _json_value(float(value))
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def _header_lines(config: RunConfig, summary: dict) -> list[str]:
    lines = [f"sparse-jl schema_version={SCHEMA_VERSION}", f"command={config.command}"]
    for key, value in config.flags.items():
        lines.append(f"config.{key}={_cell(value)}")
    lines += [f"config.seed={config.seed}", f"config.threads={config.threads}"]
    lines += [f"summary.{key}={_cell(value)}" for key, value in summary.items()]
    return lines


def render(config: RunConfig, report: Report) -> str:
    """Serialise ``report`` in ``config.format``."""
    if config.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": config.command,
            "config": _json_value({**config.flags, "seed": config.seed, "threads": config.threads}),
            "summary": _json_value(report.summary),
            "passed": report.passed,
            "columns": report.columns,
            "rows": _json_value(report.rows),
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if config.format == "csv":
        buf = io.StringIO()
        for line in _header_lines(config, report.summary):
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()
    lines = _header_lines(config, report.summary)
    if report.columns:
        cells = [report.columns] + [[_cell(v) for v in row] for row in report.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(report.columns))]
        lines.append("")
        lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- flag types


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _fraction_list(text: str) -> list[Fraction]:
    return [Fraction(tok.strip()) for tok in text.split(",") if tok.strip()]


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _grid(args, default: list[float]) -> list[float]:
    if args.grid is not None:
        return _float_list(args.grid)
    if args.grid_log is not None:
        lo, hi, count = args.grid_log
        if not 0 < lo <= hi or count < 0 or count != int(count):
            raise UsageError("--grid-log needs 0 < LO <= HI and an integer COUNT >= 0")
        return [float(x) for x in np.geomspace(lo, hi, int(count))] if count else []
    return default


def _rule(args) -> SparsityRule:
    if (args.s is None) == (args.ratio is None):
        raise UsageError("give exactly one of --s and --ratio")
    return SparsityRule(fixed_s=args.s) if args.s is not None else SparsityRule(ratio=args.ratio)


def _warn_order(d: int, m: int) -> None:
    if d > m / 2:
        log.warning("order d=%d exceeds m/2=%g; the aggregation step is unreliable when d is "
                    "comparable to m", d, m / 2)


def _map(threads: int, func, items):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(min(threads, len(items))) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------- commands


def cmd_bound(args, config: RunConfig) -> Report:
    params = BoundParams(args.n, args.m, args.s, args.v)
    result = epsilon_bound_detail(params, args.delta, args.mode, args.d_max, args.family)
    _warn_order(result.d, args.m)
    columns = ["epsilon", "Q", "d", "error_moment", "mode", "family"]
    row = [result.epsilon, result.Q, result.d, result.Q / args.s, result.mode, args.family]
    summary = {"epsilon": result.epsilon, "Q": result.Q, "d": result.d,
               "confidence": 1.0 - args.delta}
    return Report(columns, [row], summary)


def _ratio(new, old):
    if new is None or old is None or old == 0:
        return None
    return new / old


def _curve_confidence(args, config):
    params = BoundParams(args.n, args.m, args.s, args.v)
    grid = _grid(args, [float(x) for x in np.geomspace(0.05, 2.0, 16)])

    def point(eps):
        new = confidence_at_epsilon(params, eps, args.d_max, "new")
        old = confidence_at_epsilon(params, eps, args.d_max, "baseline")
        return [eps, new, old, _ratio(new, old), 1.0 - new, 1.0 - old]

    columns = ["epsilon", "new", "baseline", "ratio", "confidence_new", "confidence_baseline"]
    return columns, _map(config.threads, point, grid)


def _curve_sparsity(args, config):
    if args.m is None:
        raise UsageError("curves sparsity needs --m")
    BoundParams(args.n, args.m, 1, args.v)
    grid = _grid(args, [float(x) for x in np.geomspace(0.05, 2.0, 12)])

    def point(eps):
        new = min_sparsity(args.n, args.m, args.v, eps, args.target, args.d_max, "new")
        old = min_sparsity(args.n, args.m, args.v, eps, args.target, args.d_max, "baseline")
        return [eps, new, old, _ratio(new, old)]

    return ["epsilon", "new", "baseline", "ratio"], _map(config.threads, point, grid)


def _curve_dimension(args, config):
    rule = _rule(args)
    BoundParams(args.n, rule.smallest_m(), rule.s_for(rule.smallest_m()), args.v)
    grid = _grid(args, [float(x) for x in np.geomspace(0.1, 1.0, 8)])

    def point(eps):
        new = min_dimension(args.n, rule, eps, args.target, args.v, args.d_max, "new")
        old = min_dimension(args.n, rule, eps, args.target, args.v, args.d_max, "baseline")
        return [eps, new, old, _ratio(new, old)]

    return ["epsilon", "new", "baseline", "ratio"], _map(config.threads, point, grid)


def _curve_union(args, config):
    rule = _rule(args)
    if args.epsilon is None or not args.epsilon > 0:
        raise UsageError("curves union needs a positive --epsilon")
    BoundParams(args.n, rule.smallest_m(), rule.s_for(rule.smallest_m()), args.v)
    grid = _grid(args, [float(x) for x in np.geomspace(10, 1e4, 7)])
    sizes = [int(round(x)) for x in grid]
    if any(size < 2 for size in sizes):
        raise UsageError("data sizes must be at least 2")

    def point(size):
        pairs = size * (size - 1) // 2
        new = union_bound_dimension(pairs, args.n, rule, args.epsilon, args.target, args.v,
                                    args.d_max, "new")
        old = union_bound_dimension(pairs, args.n, rule, args.epsilon, args.target, args.v,
                                    args.d_max, "baseline")
        return [size, new, old, _ratio(new, old), pairs]

    return ["data_size", "new", "baseline", "ratio", "pair_count"], _map(config.threads, point, sizes)


_CURVES = {
    "confidence": _curve_confidence,
    "sparsity": _curve_sparsity,
    "dimension": _curve_dimension,
    "union": _curve_union,
}


def cmd_curves(args, config: RunConfig) -> Report:
    if not 0 <= args.target < 1:
        raise UsageError(f"--target must lie in [0, 1), got {args.target}")
    columns, rows = _CURVES[args.family](args, config)
    return Report(columns, rows, {"points": len(rows)})


def cmd_ratio_grid(args, config: RunConfig) -> Report:
    p_grid = np.geomspace(args.p_range[0], args.p_range[1], int(args.points[0]))
    v_grid = np.geomspace(args.v_range[0], args.v_range[1], int(args.points[1]))
    rows = ratio_grid(args.n, p_grid, v_grid, _float_list(args.d_grid))
    ratios = [r.ratio for r in rows if r.supported]
    summary = {
        "cells": len(rows),
        "supported": len(ratios),
        "max_ratio": max(ratios) if ratios else None,
        "min_ratio": min(ratios) if ratios else None,
    }
    columns = ["d", "p", "v", "t_new", "t_old", "ratio", "supported"]
    return Report(columns, [[getattr(r, c) for c in columns] for r in rows], summary)


def _load_dataset(args):
    return load(args.input, args.input_format, args.header)


def cmd_disperse(args, config: RunConfig) -> Report:
    dataset = _load_dataset(args)
    profile = dispersion_profile(dataset, args.subsample, config.seed)
    summary = {
        "rows": dataset.size,
        "n": dataset.dim,
        "subsample": len(profile.subsample),
        "sample_pairs": profile.sample_pairs,
        "skipped_pairs": profile.skipped_pairs,
        "typical": profile.typical,
        "min": float(profile.values.min()),
        "max": float(profile.values.max()),
        "lower_limit": 1.0 / math.sqrt(dataset.dim),
    }
    if args.values:
        return Report(["pair", "v"], [[k, float(v)] for k, v in enumerate(profile.values)], summary)
    return Report(["quantile", "v"], [[q, v] for q, v in profile.quantiles.items()], summary)


def cmd_project(args, config: RunConfig) -> Report:
    dataset = _load_dataset(args)
    n = dataset.dim
    if args.epsilon_grid is not None:
        table = empirical_distortion_profile(dataset, args.m, args.s, args.pairs, args.embeddings,
                                             _float_list(args.epsilon_grid), seed=config.seed,
                                             variant=args.variant, d_max=args.d_max)
        columns = ["epsilon", "trials", "exceed_count", "exceed_rate", "wilson_99_low",
                   "wilson_99_high", "delta_typical", "delta_pair_mean"]
        rows = [[getattr(r, c) for c in columns] for r in table]
        return Report(columns, rows, {"rows": dataset.size, "n": n, "points": len(rows)})
    emb = sample_matrix(n, args.m, args.s, args.variant, config.seed)
    if args.save_embedding:
        emb.save(args.save_embedding)
    projected = (emb.to_scipy() @ dataset.rows.T).T
    if hasattr(projected, "toarray"):
        projected = projected.toarray()
    columns = ["row"] + [f"y{k}" for k in range(args.m)]
    rows = [[i] + [float(v) for v in projected[i]] for i in range(dataset.size)]
    return Report(columns, rows, {"rows": dataset.size, "n": n, "m": args.m, "s": args.s})


def cmd_verify_exact(args, config: RunConfig) -> Report:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise UsageError(f"unknown checks {sorted(unknown)}; choose from {CHECKS}")
    if args.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    ps = _fraction_list(args.p)
    if not ps or any(not 0 < p <= Fraction(1, 2) for p in ps):
        raise UsageError("every --p must lie in (0, 1/2]")
    if args.d_max < 2 or args.d_max % 2:
        raise UsageError("--d-max must be even and >= 2")
    ns = range(2, args.n_max + 1)
    runners = {
        "moments": lambda: check_moments(ns, ps, args.d_max),
        "row-bound": lambda: check_row_bound(ns, ps, args.d_max, args.vectors, config.seed),
        "decoupling": lambda: check_decoupling(ns, ps, args.d_max, args.vectors, config.seed),
        "majorization": lambda: check_majorization(ns, ps, args.d_max, args.pairs, config.seed),
    }
    rows = []
    passed = True
    for name in checks:
        result = runners[name]()
        passed &= result.passed
        rows.append([name, result.cases, result.violations, result.worst, result.passed])
        for example in result.examples:
            log.warning("%s violation: %s", name, example)
    return Report(["check", "cases", "violations", "worst_ratio", "passed"], rows,
                  {"checks": len(rows), "passed": passed}, passed)


def cmd_verify_mc(args, config: RunConfig) -> Report:
    if not 0 < args.delta < 1:
        raise UsageError("--delta must lie in (0, 1)")
    vs = _float_list(args.v)
    all_params = [BoundParams(args.n, args.m, args.s, v) for v in vs]
    rows = []
    passed = True
    for params in all_params:
        check = check_tail(params, args.delta, args.trials, config.seed, args.mode, config.threads)
        _warn_order(check.d, args.m)
        est = check.estimate
        passed &= check.passed
        rows.append([params.v, check.epsilon, check.d, est.trials, est.exceed_count,
                     est.point_estimate, est.wilson_99_low, est.wilson_99_high, args.delta,
                     check.passed])
    columns = ["v", "epsilon", "d", "trials", "exceed_count", "exceed_rate", "wilson_99_low",
               "wilson_99_high", "delta", "passed"]
    return Report(columns, rows, {"passed": passed}, passed)


@dataclass(frozen=True)
class BenchSample:
    n: int
    m: int
    s: int
    v: float
    delta: float
    p_clamped: bool
    v_clamped: bool


def bench_samples(count: int, seed: int) -> list[BenchSample]:
    """Random bound queries: ``n ~ U[1e3, 1e6]``, ``m ~ U[0.01 n, n]``,
    ``d ~ U{2..30}``, ``p, v ~ U(0, 1)`` clamped to ``p <= 1/2`` and
    ``v >= 1/sqrt(n)``; ``s = round(p m)`` and ``delta = max(e^-d, 1e-13)``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1_000, 1_000_001))
        m = int(rng.integers(math.ceil(0.01 * n), n + 1))
        d = int(rng.integers(2, 31))
        p, v = float(rng.random()), float(rng.random())
        p_clamped, v_clamped = p > 0.5, v < 1.0 / math.sqrt(n)
        p, v = min(p, 0.5), max(v, 1.0 / math.sqrt(n))
        s = min(max(1, round(p * m)), m // 2)
        out.append(BenchSample(n, m, s, v, max(math.exp(-d), 1e-13), p_clamped, v_clamped))
    return out


def cmd_bench(args, config: RunConfig) -> Report:
    samples = bench_samples(args.samples, config.seed)
    times = []
    for sample in samples:
        start = time.perf_counter()
        epsilon_bound(BoundParams(sample.n, sample.m, sample.s, sample.v), sample.delta,
                      args.mode, args.d_max)
        times.append((time.perf_counter() - start) * 1e3)
    times = np.array(times)
    median = float(np.median(times))
    summary = {
        "samples": len(samples),
        "median_ms": median,
        "mean_ms": float(times.mean()),
        "p90_ms": float(np.quantile(times, 0.9)),
        "p99_ms": float(np.quantile(times, 0.99)),
        "max_ms": float(times.max()),
        "clamp_rate": float(np.mean([s.p_clamped or s.v_clamped for s in samples])),
        "p_clamp_rate": float(np.mean([s.p_clamped for s in samples])),
        "v_clamp_rate": float(np.mean([s.v_clamped for s in samples])),
    }
    edges = np.geomspace(max(times.min(), 1e-3), times.max() * (1 + 1e-9), args.bins + 1)
    counts, _ = np.histogram(np.clip(times, edges[0], edges[-1]), bins=edges)
    rows = [[float(lo), float(hi), int(c)] for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    passed = args.max_median_ms is None or median <= args.max_median_ms
    return Report(["bin_low_ms", "bin_high_ms", "count"], rows, summary, passed)


# ---------------------------------------------------------------- parser


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _common(parser: argparse.ArgumentParser, default_format: str) -> None:
    group = parser.add_argument_group("output")
    group.add_argument("-o", "--output", help="write here instead of stdout")
    group.add_argument("--format", choices=OUTPUT_FORMATS, default=default_format)
    group.add_argument("--seed", type=_nonneg_int, default=0)
    group.add_argument("--threads", type=_positive_int, default=None,
                       help=f"worker threads (default: ${THREADS_ENV} or 1)")


def _params_flags(parser, s_required=True, m_required=True) -> None:
    parser.add_argument("--n", type=int, required=True, help="ambient dimension")
    parser.add_argument("--m", type=int, required=m_required, help="embedding dimension")
    parser.add_argument("--s", type=int, required=s_required, help="column sparsity")
    parser.add_argument("--v", type=float, required=True, help="dispersion ||x||_inf/||x||_2")


def _grid_flags(parser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--grid", help="comma-separated x values (may be empty)")
    group.add_argument("--grid-log", nargs=3, type=float, metavar=("LO", "HI", "COUNT"),
                       help="COUNT log-spaced x values from LO to HI")


def _dataset_flags(parser) -> None:
    parser.add_argument("--input", required=True, help="dataset file")
    parser.add_argument("--input-format", choices=FORMATS, default=None,
                        help="default: matrix-market for .mtx/.mm, dense-csv otherwise")
    parser.add_argument("--header", action="store_true", help="skip the first CSV line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-jl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="distortion guaranteed at confidence 1 - delta")
    _params_flags(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mode", choices=("corollary", "optimized"), default="optimized")
    p.add_argument("--d-max", type=int, default=64)
    p.add_argument("--family", choices=FAMILIES, default="new")
    _common(p, "pretty")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("curves", help="new-vs-baseline curves as CSV")
    p.add_argument("family", choices=tuple(_CURVES))
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--m", type=int, help="embedding dimension (confidence, sparsity)")
    p.add_argument("--s", type=int, help="fixed column sparsity")
    p.add_argument("--ratio", type=float, help="fixed s/m (dimension, union)")
    p.add_argument("--v", type=float, default=0.05)
    p.add_argument("--target", type=float, default=0.75, help="confidence target")
    p.add_argument("--epsilon", type=float, help="distortion (union)")
    p.add_argument("--d-max", type=int, default=64)
    _grid_flags(p)
    _common(p, "csv")
    p.set_defaults(handler=cmd_curves)

    p = sub.add_parser("ratio-grid", help="row-bound ratio new/baseline over a grid")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--d-grid", default=",".join(str(d) for d in range(2, 33, 2)))
    p.add_argument("--p-range", nargs=2, type=float, default=[1e-3, 0.5], metavar=("LO", "HI"))
    p.add_argument("--v-range", nargs=2, type=float, default=[1e-2, 1.0], metavar=("LO", "HI"))
    p.add_argument("--points", nargs=2, type=_positive_int, default=[25, 25], metavar=("NP", "NV"))
    _common(p, "csv")
    p.set_defaults(handler=cmd_ratio_grid)

    p = sub.add_parser("disperse", help="dispersion profile of a dataset")
    _dataset_flags(p)
    p.add_argument("--subsample", type=int, default=250)
    p.add_argument("--values", action="store_true", help="emit every pair value")
    _common(p, "pretty")
    p.set_defaults(handler=cmd_disperse)

    p = sub.add_parser("project", help="embed a dataset or tabulate its empirical distortion")
    _dataset_flags(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="column-wor")
    p.add_argument("--save-embedding", help="write the embedding record (JSON) here")
    p.add_argument("--epsilon-grid", help="tabulate exceedance at these distortions instead")
    p.add_argument("--pairs", type=_nonneg_int, default=100)
    p.add_argument("--embeddings", type=_positive_int, default=100)
    p.add_argument("--d-max", type=int, default=64)
    _common(p, "csv")
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("verify", help="check the bounds against exact or sampled ground truth")
    vsub = p.add_subparsers(dest="kind", required=True)
    q = vsub.add_parser("exact", help="exact enumeration on small instances")
    q.add_argument("--n-max", type=int, default=4)
    q.add_argument("--p", default="1/4,1/2", help="comma-separated rationals")
    q.add_argument("--d-max", type=int, default=6)
    q.add_argument("--vectors", type=_positive_int, default=20)
    q.add_argument("--pairs", type=_positive_int, default=200)
    q.add_argument("--checks", default=",".join(CHECKS))
    _common(q, "pretty")
    q.set_defaults(handler=cmd_verify_exact)
    q = vsub.add_parser("mc", help="Monte-Carlo exceedance of the proved distortion")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--v", required=True, help="comma-separated dispersions")
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--trials", type=_positive_int, default=10_000)
    q.add_argument("--mode", choices=("corollary", "optimized"), default="optimized")
    _common(q, "pretty")
    q.set_defaults(handler=cmd_verify_mc)

    p = sub.add_parser("bench", help="latency of random bound queries")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--mode", choices=("corollary", "optimized"), default="optimized")
    p.add_argument("--d-max", type=int, default=64)
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--max-median-ms", type=float, default=None,
                   help="exit 1 if the median latency exceeds this")
    _common(p, "pretty")
    p.set_defaults(handler=cmd_bench)
    return parser


_RESERVED = ("handler", "command", "kind", "output", "format", "seed", "threads")


def resolve(args: argparse.Namespace) -> RunConfig:
    command = args.command
    if command == "verify":
        command = f"verify {args.kind}"
    elif command == "curves":
        command = f"curves {args.family}"
    flags = {k: v for k, v in vars(args).items() if k not in _RESERVED}
    threads = args.threads if args.threads is not None else _default_threads()
    return RunConfig(command, flags, args.output, args.format, args.seed, threads)


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = resolve(args)
    try:
        report = args.handler(args, config)
    except (DomainError, ValueError, OSError) as exc:
        print(f"sparse-jl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(config, report)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
