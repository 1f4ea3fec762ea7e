"""Exact and Monte-Carlo checks of the moment inequalities behind the bounds.

Each ``check_*`` function enumerates small instances with rational
arithmetic and returns a :class:`CheckResult` counting violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .moments import as_fraction, sum_moments
from .oracle import (
    TailEstimate,
    exact_linear_moment,
    exact_row_moment,
    majorizes,
    mc_error_tail,
    random_unit_squares,
    robin_hood_transfer,
    worst_case_squares,
)
from .row_bound import BoundParams, row_bound_value, worst_case_linear_moment
from .tail_bounds import epsilon_bound_detail

__all__ = [
    "CHECKS",
    "CheckResult",
    "TailCheck",
    "v_squared_grid",
    "check_moments",
    "check_row_bound",
    "check_decoupling",
    "check_majorization",
    "check_tail",
]

CHECKS = ("moments", "row-bound", "decoupling", "majorization")


@dataclass
class CheckResult:
    """Outcome of one family of exact comparisons.

    ``worst`` is the largest ``lhs / rhs`` seen (values above one are
    violations up to ``tol``); ``examples`` keeps the first few violating
    cases for reporting.
    """

    name: str
    cases: int = 0
    violations: int = 0
    worst: float = 0.0
    examples: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, lhs: float, rhs: float, tol: float = 0.0, violated: bool | None = None,
               **case) -> None:
        """Log one comparison; ``violated`` overrides ``lhs > rhs + tol`` for
        exact comparisons."""
        self.cases += 1
        if rhs > 0:
            self.worst = max(self.worst, lhs / rhs)
        elif lhs > 0:
            self.worst = math.inf
        if violated is None:
            violated = lhs > rhs + tol
        if violated:
            self.violations += 1
            if len(self.examples) < 5:
                self.examples.append({"lhs": lhs, "rhs": rhs, **case})


def _root(value: Fraction, d: int) -> float:
    return float(value) ** (1.0 / d) if value > 0 else 0.0


def v_squared_grid(n: int) -> list[Fraction]:
    """Rational squared dispersions from the flat vector ``1/n`` up to 1."""
    low = Fraction(1, n)
    grid = {low, Fraction(1)}
    for frac in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        grid.add(low + frac * (1 - low))
    return sorted(grid)


def check_moments(ns, ps, d_max: int = 8) -> CheckResult:
    """Cumulant-based sum moments against direct enumeration, and the
    flat-vector moment formula against enumeration at ``x*``."""
    result = CheckResult("moments")
    for n in ns:
        for p in ps:
            p = as_fraction(p)
            table = sum_moments(p, n - 1, d_max)
            for j in range(0, d_max + 1, 2):
                direct = exact_linear_moment([1] * (n - 1), p, j) if n > 1 else Fraction(j == 0)
                result.record(float(table[j]), float(direct), violated=table[j] != direct,
                              n=n, p=str(p), j=j, what="sum")
            for v2 in v_squared_grid(n):
                squares = worst_case_squares(n, v2)
                for d in range(2, d_max + 1, 2):
                    lhs = worst_case_linear_moment(n, p, v2, d)
                    rhs = exact_linear_moment(squares, p, d, squared=True)
                    result.record(float(lhs), float(rhs), violated=lhs != rhs,
                                  n=n, p=str(p), d=d, v2=str(v2), what="flat")
    return result


def _unit_vectors(n: int, v2: Fraction, count: int, rng: np.random.Generator):
    yield "x*", worst_case_squares(n, v2)
    for k in range(count):
        yield f"random-{k}", random_unit_squares(n, v2, rng)


def check_row_bound(ns, ps, d_max: int = 6, vectors: int = 20, seed: int = 0,
                    tol: float = 1e-12) -> CheckResult:
    """Exact ``||E_r(x)||_d`` against the row bound at ``v = ||x||_inf``."""
    rng = np.random.default_rng(seed)
    result = CheckResult("row-bound")
    for n in ns:
        for p in ps:
            p = as_fraction(p)
            for v2 in v_squared_grid(n):
                v = math.sqrt(v2)
                bounds = {d: row_bound_value(n, p, v, d) for d in range(2, d_max + 1, 2)}
                for label, squares in _unit_vectors(n, v2, vectors, rng):
                    for d, bound in bounds.items():
                        norm = _root(exact_row_moment(squares, p, d, squared=True), d)
                        result.record(norm, bound, tol, n=n, p=str(p), v2=str(v2), d=d, x=label)
    return result


def check_decoupling(ns, ps, d_max: int = 6, vectors: int = 50, seed: int = 0,
                     tol: float = 1e-12) -> CheckResult:
    """``||sum_{i != j} Z_i Z_j||_d <= 4 ||sum_i Z_i||_d^2`` for ``Z_i = x_i eta_i``."""
    rng = np.random.default_rng(seed)
    result = CheckResult("decoupling")
    for n in ns:
        for p in ps:
            p = as_fraction(p)
            for k in range(vectors):
                v2 = Fraction(int(rng.integers(1, 17)), 16) * (1 - Fraction(1, n)) + Fraction(1, n)
                squares = random_unit_squares(n, v2, rng)
                for d in range(2, d_max + 1, 2):
                    lhs = _root(exact_row_moment(squares, p, d, squared=True), d)
                    rhs = 4.0 * _root(exact_linear_moment(squares, p, d, squared=True), d) ** 2
                    result.record(lhs, rhs, tol, n=n, p=str(p), d=d, vector=k)
    return result


def check_majorization(ns, ps, d_max: int = 6, pairs: int = 200, seed: int = 0) -> CheckResult:
    """Schur-concavity of ``E S(x)^d`` in the squared weights.

    For each pair ``u`` majorizing ``w`` (built by mass transfers) the moment
    at ``u`` must not exceed the moment at ``w``; and the flat vector ``x*``
    must have the largest moment among all tested vectors with the same
    maximum. Comparisons are exact, so any strict excess is a violation.
    """
    rng = np.random.default_rng(seed)
    result = CheckResult("majorization")
    for n in ns:
        grid = v_squared_grid(n)
        for p in ps:
            p = as_fraction(p)
            for d in range(2, d_max + 1, 2):
                star = {v2: exact_linear_moment(worst_case_squares(n, v2), p, d, squared=True)
                        for v2 in grid}
                for k in range(pairs):
                    v2 = grid[int(rng.integers(len(grid)))]
                    u = random_unit_squares(n, v2, rng)
                    w = robin_hood_transfer(u, rng, steps=int(rng.integers(1, 4)))
                    assert majorizes(u, w)
                    mu = exact_linear_moment(u, p, d, squared=True)
                    mw = exact_linear_moment(w, p, d, squared=True)
                    case = dict(n=n, p=str(p), d=d, pair=k)
                    result.record(float(mu), float(mw), violated=mu > mw, **case)
                    result.record(float(mu), float(star[v2]), violated=mu > star[v2], vs="x*", **case)
    return result


@dataclass(frozen=True)
class TailCheck:
    """Monte-Carlo exceedance of the proved distortion at one dispersion."""

    params: BoundParams
    delta: float
    epsilon: float
    d: int
    estimate: TailEstimate

    @property
    def passed(self) -> bool:
        return self.estimate.wilson_99_high <= self.delta


def check_tail(params: BoundParams, delta: float, trials: int, seed: int = 0,
               mode: str = "optimized", threads: int = 1) -> TailCheck:
    """Sample embeddings at ``x*`` and compare the exceedance of the proved
    ``epsilon`` with ``delta`` via the upper Wilson 99% limit."""
    bound = epsilon_bound_detail(params, delta, mode)
    estimate = mc_error_tail(params, bound.epsilon, trials, seed, threads=threads)
    return TailCheck(params, delta, bound.epsilon, bound.d, estimate)
