"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``. The Monte-Carlo
criterion takes a few minutes on one core.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from sparse_jl.cli import main
from sparse_jl.embedding import sample_matrix
from sparse_jl.moments import sum_moments
from sparse_jl.oracle import exact_linear_moment
from sparse_jl.row_bound import BoundParams, ratio_grid, row_bound_value
from sparse_jl.tail_bounds import aggregate_bound
from sparse_jl.verify import check_decoupling, check_majorization, check_row_bound, check_tail

SMALL_N = range(2, 7)
SMALL_P = [Fraction(1, 4), Fraction(1, 2)]


def run_json(capsys, *argv):
    code = main([str(a) for a in argv] + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_criterion_01_exact_moments(criterion):
    start = time.perf_counter()
    cases = mismatches = 0
    for n in range(2, 9):
        for p in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)):
            table = sum_moments(p, n - 1, 8)
            for j in range(0, 9, 2):
                cases += 1
                mismatches += table[j] != exact_linear_moment([1] * (n - 1), p, j)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 30
    assert criterion(1, ok, f"{cases} cases, {mismatches} mismatches, {elapsed:.1f} s")


def test_criterion_02_order_two_closed_forms(criterion):
    rng = np.random.default_rng(2)
    worst_t = worst_q = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 10**6))
        m = int(rng.integers(2, 10**5))
        s = int(rng.integers(1, m // 2 + 1))
        v = float(rng.uniform(1 / math.sqrt(n), 1.0))
        p = Fraction(s, m)
        t = row_bound_value(n, p, v, 2)
        worst_t = max(worst_t, abs(t / (4 * float(p)) - 1))
        q = aggregate_bound(BoundParams(n, m, s, v), 2).Q
        worst_q = max(worst_q, abs(q / (4 * float(p) / math.sqrt(math.expm1(1 / m))) - 1))
    ok = worst_t <= 1e-12 and worst_q <= 1e-9
    assert criterion(2, ok, f"max rel error T={worst_t:.2e} (tol 1e-12), Q={worst_q:.2e} (tol 1e-9)")


def test_criterion_03_row_bound_soundness(criterion):
    result = check_row_bound(SMALL_N, SMALL_P, d_max=6, vectors=20, seed=0, tol=1e-12)
    assert criterion(3, result.passed, f"{result.cases} cases, {result.violations} violations, "
                                       f"worst ratio {result.worst:.4f}")


def test_criterion_04_decoupling(criterion):
    result = check_decoupling(SMALL_N, SMALL_P, d_max=6, vectors=50, seed=0, tol=1e-12)
    assert criterion(4, result.passed, f"{result.cases} cases, {result.violations} violations, "
                                       f"worst ratio {result.worst:.4f}")


def test_criterion_05_majorization_ordering(criterion):
    results = {str(p): check_majorization(SMALL_N, [p], d_max=6, pairs=200, seed=0) for p in SMALL_P}
    cases = sum(r.cases for r in results.values())
    violations = {p: r.violations for p, r in results.items()}
    worst = max(r.worst for r in results.values())
    passed = all(r.passed for r in results.values())
    detail = (f"{cases} cases, violations by p {violations}, worst ratio {worst:.4f}")
    assert criterion(5, passed, detail)


def test_criterion_06_monte_carlo_tail(criterion):
    lines = []
    ok = True
    start = time.perf_counter()
    for v in (0.05, 0.2):
        check = check_tail(BoundParams(10_000, 1000, 10, v), 0.25, 100_000, seed=0)
        est = check.estimate
        ok &= check.passed and check.d <= 500
        lines.append(f"v={v}: eps={check.epsilon:.4f} d={check.d} exceed={est.exceed_count}/"
                     f"{est.trials} wilson99_high={est.wilson_99_high:.2e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    assert criterion(6, ok, "; ".join(lines) + f"; {elapsed:.0f} s")


def test_criterion_07_dominance(criterion):
    n = 10_000
    p_grid = np.geomspace(1e-3, 0.5, 25)
    v_grid = np.geomspace(max(1e-2, 1 / math.sqrt(n)), 1.0, 25)
    rows = ratio_grid(n, p_grid, v_grid, range(2, 33, 2))
    ratios = np.array([r.ratio for r in rows])
    supported = all(r.supported for r in rows)
    ok = supported and ratios.max() <= 1.0 and ratios.min() <= 0.1
    assert criterion(7, ok, f"{len(rows)} cells, max ratio {ratios.max():.4f}, "
                            f"min ratio {ratios.min():.4f}")


def test_criterion_08_latency(criterion, capsys):
    code, doc = run_json(capsys, "bench", "--samples", 1000, "--mode", "optimized")
    summary = doc["summary"]
    ok = code == 0 and summary["samples"] >= 1000 and summary["median_ms"] <= 10.0
    assert criterion(8, ok, f"median {summary['median_ms']:.2f} ms over {summary['samples']} "
                            f"optimized-mode calls, p99 {summary['p99_ms']:.2f} ms, "
                            f"clamp rate {summary['clamp_rate']:.3f}")


def test_criterion_09_basis_vectors(criterion):
    n, m, s = 300, 64, 8
    worst = 0.0
    for seed in range(100):
        emb = sample_matrix(n, m, s, seed=seed)
        for i in range(n):
            x = np.zeros(n)
            x[i] = 1.0
            worst = max(worst, abs(emb.distortion(x)))
    assert criterion(9, worst == 0.0, f"100 embeddings x {n} basis vectors, max |distortion| {worst}")


def test_criterion_10_dataset_and_curves(criterion, capsys, tmp_path):
    rng = np.random.default_rng(10)
    dense = rng.standard_normal((60, 40))
    np.savetxt(tmp_path / "dense.csv", dense, delimiter=",")
    sparse = sp.random(80, 500, density=0.02, random_state=11, format="coo")
    scipy.io.mmwrite(tmp_path / "sparse.mtx", sparse)
    problems = []
    for name, n in (("dense.csv", 40), ("sparse.mtx", 500)):
        runs = [run_json(capsys, "disperse", "--input", tmp_path / name, "--values")
                for _ in range(2)]
        (code, first), (_, second) = runs
        values = [row[1] for row in first["rows"]]
        if code != 0 or not values:
            problems.append(f"{name}: exit {code}")
        elif min(values) < 1 / math.sqrt(n) or max(values) > 1:
            problems.append(f"{name}: values outside [1/sqrt(n), 1]")
        if first != second:
            problems.append(f"{name}: not reproducible")

    curves = {
        "confidence": ["--m", 200, "--s", 4, "--grid", "0.5,1.0"],
        "sparsity": ["--m", 200, "--grid", "1.0"],
        "dimension": ["--s", 2, "--grid", "1.0"],
        "union": ["--ratio", 0.05, "--epsilon", 1.0, "--grid", "100"],
    }
    for family, extra in curves.items():
        code = main(["curves", family, "--n", "1000", "--v", "0.1", "--format", "csv"]
                    + [str(a) for a in extra])
        out = capsys.readouterr().out
        body = [line for line in out.splitlines() if not line.startswith("#")]
        columns = body[0].split(",") if body else []
        if code != 0 or columns[1:4] != ["new", "baseline", "ratio"] or len(body) < 2:
            problems.append(f"curves {family}: bad output")
    ok = not problems
    assert criterion(10, ok, "disperse in range and reproducible on CSV and Matrix Market; "
                             "four curve families emitted" if ok else "; ".join(problems))
