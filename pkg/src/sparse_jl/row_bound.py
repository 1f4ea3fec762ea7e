"""Per-row moment bounds for sparse sign embeddings.

The row error of a sparse embedding at a unit vector ``x`` is a quadratic
form in i.i.d. trinary variables. Its ``d``-th moment norm is bounded by
``T_{n,p,d}(v)``, four times the squared ``d``-norm of a linear form taken
at the flattest unit vector with sup-norm ``v``. The prior-work analogue
with optimistic constants is provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .moments import DomainError, as_fraction, binom_diff_moments, sum_moments

__all__ = [
    "BoundParams",
    "RatioRow",
    "C1",
    "C2",
    "row_moment_bound",
    "row_moment_bounds",
    "row_bound_value",
    "worst_case_linear_moment",
    "baseline_row_bound",
    "ratio_grid",
]

C1 = 4.0 * math.e
C2 = 8.0

_V_SLACK = 1e-12


@dataclass(frozen=True)
class BoundParams:
    """Ambient dimension ``n``, embedding dimension ``m``, column sparsity ``s``
    and dispersion ``v = ||x||_inf / ||x||_2``."""

    n: int
    m: int
    s: int
    v: float

    def __post_init__(self):
        n, m, s, v = self.n, self.m, self.s, self.v
        if n < 2:
            raise DomainError(f"n must be at least 2, got {n}")
        if m < 1 or s < 1:
            raise DomainError(f"m and s must be positive, got m={m}, s={s}")
        if s > m:
            raise DomainError(f"sparsity s={s} exceeds embedding dimension m={m}")
        if 2 * s > m:
            raise DomainError(f"p = s/m = {s}/{m} exceeds 1/2")
        if not (1.0 / math.sqrt(n) - _V_SLACK <= v <= 1.0 + _V_SLACK):
            raise DomainError(
                f"v={v} infeasible for n={n}: a unit vector needs 1/sqrt(n) <= v <= 1"
            )

    @property
    def p(self) -> Fraction:
        return Fraction(self.s, self.m)

    @classmethod
    def from_ratio(cls, n: int, p, v: float, max_denominator: int = 10**6) -> "BoundParams":
        """Build parameters from a sparsity ratio, choosing ``s/m = p`` exactly
        when ``p`` is rational with a small denominator."""
        frac = as_fraction(p).limit_denominator(max_denominator)
        if frac <= 0:
            raise DomainError(f"p must be positive, got {p}")
        return cls(n=n, m=frac.denominator, s=frac.numerator, v=float(v))

    def replace(self, **changes) -> "BoundParams":
        fields = asdict(self)
        fields.update(changes)
        return BoundParams(**fields)


def _check_even(d: int) -> None:
    if d < 2 or d % 2:
        raise ValueError(f"order d must be an even integer >= 2, got {d}")


def _clip_v(n: int, v: float) -> float:
    return min(1.0, max(v, 1.0 / math.sqrt(n)))


def row_bound_value(n: int, p, v: float, d: int, diff_moments: list[float] | None = None) -> float:
    """``T_{n,p,d}(v)`` from raw parameters.

    ``diff_moments`` may carry precomputed ``E(B'-B'')^j`` for ``j <= d``.
    """
    _check_even(d)
    p = as_fraction(p)
    if diff_moments is None:
        diff_moments = binom_diff_moments(n, p, d)
    v = _clip_v(n, v)
    v2 = v * v
    rest = 1.0 - v2
    pf = float(p)
    terms = []
    for k in range(d // 2 + 1):
        weight = comb(d, 2 * k) * (pf if k else 1.0)
        terms.append(weight * v2**k * rest ** ((d - 2 * k) // 2) * diff_moments[d - 2 * k])
    return 4.0 * math.fsum(terms) ** (2.0 / d)


def row_moment_bound(params: BoundParams, d: int) -> float:
    """Bound ``T`` on ``||E_r(x)||_d`` for unit ``x`` with sup-norm ``params.v``."""
    return row_bound_value(params.n, params.p, params.v, d)


@lru_cache(maxsize=16)
def _even_binomials(d_max: int) -> np.ndarray:
    """``C(d, 2k)`` for even ``d <= d_max`` (rows ``d/2``) and ``k <= d/2``."""
    half = d_max // 2
    out = np.zeros((half + 1, half + 1))
    for a in range(half + 1):
        for k in range(a + 1):
            out[a, k] = comb(2 * a, 2 * k)
    return out


def row_moment_bounds(n: int, p, v: float, d_max: int) -> dict[int, float]:
    """``T_{n,p,d}(v)`` for every even ``d`` in ``2..d_max`` from one moment table.

    Same terms as :func:`row_bound_value`, evaluated for all orders at once.
    """
    _check_even(d_max)
    pf = float(as_fraction(p))
    moments = np.asarray(binom_diff_moments(n, p, d_max))
    v = _clip_v(n, v)
    v2 = v * v
    half = d_max // 2
    a = np.arange(half + 1)[:, None]
    k = np.arange(half + 1)[None, :]
    live = k <= a
    gap = np.where(live, a - k, 0)
    with np.errstate(under="ignore"):
        terms = (_even_binomials(d_max) * np.where(k > 0, pf, 1.0) * v2 ** k
                 * (1.0 - v2) ** gap * moments[2 * gap])
    totals = np.where(live, terms, 0.0).sum(axis=1)
    return {2 * i: 4.0 * float(totals[i]) ** (1.0 / i) for i in range(1, half + 1)}


def worst_case_linear_moment(n: int, p, v_squared, d: int) -> Fraction:
    """Exact ``E[(sum_i x*_i Y_i)^d]`` at the flattest unit vector with
    ``max x_i^2 = v_squared``; rational whenever ``p`` and ``v_squared`` are."""
    _check_even(d)
    p = as_fraction(p)
    v2 = as_fraction(v_squared)
    rest = (1 - v2) / (n - 1)
    table = sum_moments(p, n - 1, d)
    total = Fraction(0)
    for k in range(d // 2 + 1):
        weight = comb(d, 2 * k) * (p if k else 1)
        total += weight * v2**k * rest ** ((d - 2 * k) // 2) * table[d - 2 * k]
    return total


def _d1(d: int, p: float, v: float) -> float:
    if v <= 0:
        raise DomainError(f"v must be positive, got {v}")
    log_base = math.log(p / (d * v * v))

    def log_f(t: float) -> float:
        return math.log(d * v / t) + log_base / (2.0 * t)

    candidates = [1.0, d / 2.0]
    if log_base < 0:
        candidates.append(min(max(-log_base / 2.0, 1.0), d / 2.0))
    best = max(log_f(t) for t in candidates)
    return 2.0 * C1 * math.exp(2.0 * best)


def _d2(d: int, p: float) -> float:
    if p >= 1.0:
        raise DomainError(f"log(1/p) <= 0 for p={p}; the second baseline bound is undefined")
    return 2.0 * C2 * d / math.log(1.0 / p)


def baseline_row_bound(d: int, p: float, v: float, variant: str = "best") -> float:
    """Prior-work row bound with optimistic constants ``C1 = 4e``, ``C2 = 8``.

    ``variant`` is ``"D1"``, ``"D2"`` or ``"best"`` (the smaller of the two that
    are defined).
    """
    _check_even(d)
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    if variant == "D1":
        return _d1(d, p, v)
    if variant == "D2":
        return _d2(d, p)
    if variant != "best":
        raise ValueError(f"unknown baseline variant {variant!r}")
    d1 = _d1(d, p, v)
    try:
        return min(d1, _d2(d, p))
    except DomainError:
        return d1


@dataclass(frozen=True)
class RatioRow:
    d: float
    p: float
    v: float
    t_new: float
    t_old: float
    ratio: float
    supported: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _even_cell(n: int, p: float, v: float, d: int) -> tuple[float, float, bool]:
    t_old = baseline_row_bound(d, p, v)
    if p > 0.5 or v < 1.0 / math.sqrt(n) - _V_SLACK:
        return math.nan, t_old, False
    t_new = row_bound_value(n, p, v, d)
    return t_new, t_old, True


def ratio_grid(n: int, p_grid, v_grid, d_grid) -> list[RatioRow]:
    """Tabulate ``T_new / T_old`` over a parameter grid.

    Cells with non-even ``d`` are linearly interpolated between the
    neighbouring even orders. Cells where the new bound is undefined
    (``p > 1/2`` or ``v < 1/sqrt(n)``) are kept with ``supported=False``.
    """
    rows = []
    cache: dict[tuple[float, float, int], tuple[float, float, bool]] = {}

    def cell(p, v, d):
        key = (p, v, d)
        if key not in cache:
            cache[key] = _even_cell(n, p, v, d)
        return cache[key]

    for d in d_grid:
        for p in p_grid:
            for v in v_grid:
                p, v = float(p), float(v)
                if float(d).is_integer() and int(d) % 2 == 0:
                    t_new, t_old, ok = cell(p, v, int(d))
                else:
                    lo = 2 * math.floor(d / 2)
                    if lo < 2:
                        raise ValueError(f"cannot interpolate below d=2, got d={d}")
                    w = (d - lo) / 2.0
                    a, b = cell(p, v, lo), cell(p, v, lo + 2)
                    ok = a[2] and b[2]
                    t_old = (1 - w) * a[1] + w * b[1]
                    t_new = (1 - w) * a[0] + w * b[0] if ok else math.nan
                    if ok:
                        ratio = (1 - w) * a[0] / a[1] + w * b[0] / b[1]
                        rows.append(RatioRow(float(d), p, v, t_new, t_old, ratio, ok))
                        continue
                ratio = t_new / t_old if ok else math.nan
                rows.append(RatioRow(float(d), p, v, t_new, t_old, ratio, ok))
    return rows
