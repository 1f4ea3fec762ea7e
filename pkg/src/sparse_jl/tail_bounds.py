"""Whole-error moment bounds, distortion guarantees and inverse queries.

Row bounds ``T_{2k}`` are aggregated over the ``m`` rows by solving

    sum_{k=0}^{d/2} C(d, 2k) (T_{2k} / Q)^{2k} = exp(d / (2m))

for ``Q``; then ``||E(x)||_d <= Q / s`` and Markov's inequality turns the
moment bound into a failure probability.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .row_bound import BoundParams, baseline_row_bound, row_moment_bounds

__all__ = [
    "AggregateBound",
    "EpsilonBound",
    "GuaranteeQuery",
    "SparsityRule",
    "INFEASIBLE",
    "RootFindingError",
    "iid_sum_norm_bound",
    "aggregate_bound",
    "aggregate_bounds",
    "row_bounds_for",
    "epsilon_bound",
    "epsilon_bound_detail",
    "corollary_order",
    "confidence_at_epsilon",
    "min_dimension",
    "min_sparsity",
    "union_bound_dimension",
]

FAMILIES = ("new", "baseline")
LOWER_FLOOR = 1e-300
REL_TOL = 1e-12
MAX_DOUBLINGS = 200

INFEASIBLE = None
"""Returned by :func:`min_dimension` when no ``m <= n`` reaches the target."""


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GuaranteeQuery:
    epsilon: float
    delta: float
    d_max: int = 64
    mode: str = "optimized"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.d_max < 2 or self.d_max % 2:
            raise ValueError(f"d_max must be even and >= 2, got {self.d_max}")
        if self.mode not in ("corollary", "optimized"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class AggregateBound:
    params: BoundParams
    d: int
    Q: float

    @property
    def error_moment(self) -> float:
        """Bound on ``||E(x)||_d``."""
        return self.Q / self.params.s


@dataclass(frozen=True)
class EpsilonBound:
    epsilon: float
    d: int
    Q: float
    mode: str


def _scaled_terms(table: np.ndarray, orders: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Row sums of ``exp(table - orders * log t)``, i.e. ``sum_k C(d,k) M_k / t^k``
    over ``k >= 1``, added left to right so each row's value does not depend on
    the rest of the batch."""
    if table.shape[1] == 0:
        return np.zeros(len(t))
    e = table - orders[None, :] * np.log(t)[:, None]
    with np.errstate(over="ignore"):
        vals = np.where(e > 700.0, np.inf, np.exp(np.minimum(e, 710.0)))
    return np.cumsum(vals, axis=1)[:, -1]


def _solve_batch(table: np.ndarray, orders: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Least ``t`` per row with ``_scaled_terms <= target``; each left side is
    continuous and strictly decreasing in ``t`` (constant zero for empty rows).

    Brackets grow from ``t = 1`` by doubling (or halving down to
    :data:`LOWER_FLOOR`); bisection then runs until ``hi - lo <= REL_TOL * hi``.
    """
    count = len(targets)

    def ok(t, rows):
        return _scaled_terms(table[rows], orders, t) <= targets[rows]

    lo, hi = np.ones(count), np.ones(count)
    out = np.full(count, np.nan)
    start_ok = ok(hi, np.arange(count))

    rows = np.flatnonzero(start_ok)
    while rows.size:
        good = ok(lo[rows], rows)
        rows = rows[good]
        hi[rows] = lo[rows]
        lo[rows] = lo[rows] / 2.0
        floor = rows[lo[rows] < LOWER_FLOOR]
        if floor.size:
            at_floor = ok(np.full(floor.size, LOWER_FLOOR), floor)
            out[floor] = np.where(at_floor, LOWER_FLOOR, hi[floor])
            rows = rows[lo[rows] >= LOWER_FLOOR]

    rows = np.flatnonzero(~start_ok)
    for _ in range(MAX_DOUBLINGS):
        if not rows.size:
            break
        lo[rows] = hi[rows]
        hi[rows] = hi[rows] * 2.0
        rows = rows[~ok(hi[rows], rows)]
    else:
        if rows.size:
            raise RootFindingError(
                f"no upper bracket after {MAX_DOUBLINGS} doublings; moment table is inconsistent"
            )

    rows = np.flatnonzero(np.isnan(out))
    while rows.size:
        rows = rows[hi[rows] - lo[rows] > REL_TOL * hi[rows]]
        if not rows.size:
            break
        mid = 0.5 * (lo[rows] + hi[rows])
        good = ok(mid, rows)
        hi[rows[good]] = mid[good]
        lo[rows[~good]] = mid[~good]
    settled = np.isnan(out)
    out[settled] = hi[settled]
    return out


def _solve(log_moments, target: float) -> float:
    """Scalar form of :func:`_solve_batch` for ``(k, log C(d,k), log M_k)`` triples."""
    orders = np.array([k for k, _, _ in log_moments], dtype=np.float64)
    table = np.array([[w + m for _, w, m in log_moments]], dtype=np.float64).reshape(1, -1)
    return float(_solve_batch(table, orders, np.array([target]))[0])


def _log_moment_table(even_moments: Callable[[int], float], d: int):
    table = []
    for k in range(2, d + 1, 2):
        mk = float(even_moments(k))
        if not math.isfinite(mk) or mk < 0:
            raise ValueError(f"moment of order {k} is not a finite nonnegative number: {mk}")
        if mk > 0:
            table.append((k, math.log(comb(d, k)), math.log(mk)))
    return table


def iid_sum_norm_bound(even_moments: Callable[[int], float] | Sequence[float], d: int, m: int,
                       rate: float = 0.5) -> float:
    """Upper bound on ``||Z_1 + ... + Z_m||_d`` for i.i.d. symmetric ``Z_i``.

    Returns the least ``t`` with ``sum_k C(d,k) E[Z^k] / t^k <= exp(rate*d/m)``
    (only even ``k`` contribute). ``even_moments`` maps an order to ``E[Z^k]``;
    a sequence indexed by order also works.
    """
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if not callable(even_moments):
        seq = even_moments
        even_moments = seq.__getitem__
    log_moments = _log_moment_table(even_moments, d)
    return _solve(log_moments, math.expm1(rate * d / m))


def row_bounds_for(params: BoundParams, d_max: int, family: str = "new") -> dict[int, float]:
    """Row moment bounds ``T_d`` for even ``d <= d_max`` under ``family``
    (``"new"`` or ``"baseline"``)."""
    return dict(_row_bounds(params.n, params.m, params.s, params.v, d_max, family))


@lru_cache(maxsize=1024)
def _row_bounds(n, m, s, v, d_max, family):
    if family == "new":
        return tuple(row_moment_bounds(n, BoundParams(n, m, s, v).p, v, d_max).items())
    if family == "baseline":
        p = s / m
        return tuple((d, baseline_row_bound(d, p, v)) for d in range(2, d_max + 1, 2))
    raise ValueError(f"unknown bound family {family!r}")


@lru_cache(maxsize=64)
def _log_binomials(orders_d: tuple[int, ...]) -> np.ndarray:
    """``log C(d, k)`` for each ``d`` (rows) and even ``k <= max d``; ``-inf`` for ``k > d``."""
    ks = range(2, max(orders_d) + 1, 2)
    return np.array([[math.log(comb(d, k)) if k <= d else -np.inf for k in ks] for d in orders_d])


def _q_table(t_values: dict[int, float], orders_d: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Log coefficients ``log C(d,k) + k log T_k`` for each ``d`` (rows) and
    even ``k`` (columns); ``-inf`` where ``k > d`` or ``T_k = 0``."""
    orders_d = tuple(orders_d)
    ks = np.arange(2, max(orders_d) + 1, 2, dtype=np.float64)
    t = np.array([t_values[int(k)] for k in ks])
    with np.errstate(divide="ignore"):
        log_t = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
    return _log_binomials(orders_d) + ks[None, :] * log_t[None, :], ks


def _q_values(t_values: dict[int, float], orders_d: Sequence[int], m: int) -> np.ndarray:
    table, ks = _q_table(t_values, orders_d)
    targets = np.array([math.expm1(d / (2.0 * m)) for d in orders_d])
    return _solve_batch(table, ks, targets)


def aggregate_bound(params: BoundParams, d: int, family: str = "new") -> AggregateBound:
    """Solve for ``Q`` so that ``||E(x)||_d <= Q / s``."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")
    t_values = row_bounds_for(params, d, family)
    return AggregateBound(params, d, float(_q_values(t_values, [d], params.m)[0]))


def aggregate_bounds(params: BoundParams, d_max: int = 64, family: str = "new") -> dict[int, float]:
    """``Q_d`` for every even ``d <= d_max``, sharing one set of row bounds."""
    return dict(_aggregate_bounds(params, d_max, family))


@lru_cache(maxsize=4096)
def _aggregate_bounds(params, d_max, family):
    if d_max < 2 or d_max % 2:
        raise ValueError(f"d_max must be even and >= 2, got {d_max}")
    t_values = row_bounds_for(params, d_max, family)
    orders_d = list(range(2, d_max + 1, 2))
    return tuple(zip(orders_d, (float(q) for q in _q_values(t_values, orders_d, params.m))))


def corollary_order(delta: float) -> int:
    """Smallest even ``d >= ln(1/delta)``, at least 2."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    x = math.log(1.0 / delta)
    return max(2, 2 * math.ceil(x / 2.0 - 1e-12))


def epsilon_bound_detail(params: BoundParams, delta: float, mode: str = "optimized",
                         d_max: int = 64, family: str = "new") -> EpsilonBound:
    """Distortion ``epsilon`` with ``Pr[|E(x)| > epsilon] <= delta``.

    ``corollary`` uses ``e * Q_d / s`` at ``d = corollary_order(delta)``;
    ``optimized`` minimises the Markov consequence ``(Q_d / s) delta^(-1/d)``
    over even ``d <= d_max``.
    """
    if mode not in ("corollary", "optimized"):
        raise ValueError(f"unknown mode {mode!r}")
    if d_max < 2 or d_max % 2:
        raise ValueError(f"d_max must be even and >= 2, got {d_max}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if mode == "corollary":
        d = corollary_order(delta)
        q = aggregate_bound(params, d, family).Q
        return EpsilonBound(math.e * q / params.s, d, q, mode)
    best = None
    for d, q in aggregate_bounds(params, d_max, family).items():
        eps = q / params.s * delta ** (-1.0 / d)
        if best is None or eps < best.epsilon:
            best = EpsilonBound(eps, d, q, mode)
    return best


def epsilon_bound(params: BoundParams, delta: float, mode: str = "optimized",
                  d_max: int = 64, family: str = "new") -> float:
    return epsilon_bound_detail(params, delta, mode, d_max, family).epsilon


def confidence_at_epsilon(params: BoundParams, epsilon: float, d_max: int = 64,
                          family: str = "new") -> float:
    """Proved failure bound ``delta_hat`` for distortion ``epsilon``.

    ``delta_hat = min(1, min_d (Q_d / (s epsilon))^d)``; the proved confidence
    is ``1 - delta_hat`` and ``delta_hat == 1`` means the bound is trivial.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    best = 1.0
    for d, q in aggregate_bounds(params, d_max, family).items():
        ratio = q / (params.s * epsilon)
        if ratio < 1.0:
            best = min(best, ratio**d)
    return best


@dataclass(frozen=True)
class SparsityRule:
    """How ``s`` follows ``m``: a fixed column sparsity or a fixed ratio ``s/m``."""

    fixed_s: int | None = None
    ratio: float | None = None

    def __post_init__(self):
        if (self.fixed_s is None) == (self.ratio is None):
            raise ValueError("give exactly one of fixed_s and ratio")
        if self.fixed_s is not None and self.fixed_s < 1:
            raise ValueError(f"fixed_s must be positive, got {self.fixed_s}")
        if self.ratio is not None and not 0 < self.ratio <= 0.5:
            raise ValueError(f"ratio must lie in (0, 1/2], got {self.ratio}")

    def s_for(self, m: int) -> int:
        if self.fixed_s is not None:
            return self.fixed_s
        return max(1, round(self.ratio * m))

    def legal(self, m: int) -> bool:
        return m >= 1 and 2 * self.s_for(m) <= m

    def smallest_m(self) -> int:
        m = 2 * self.fixed_s if self.fixed_s is not None else 2
        while not self.legal(m):
            m += 1
        return m


def _confident(n, m, rule, epsilon, target, v, d_max, family) -> bool:
    if not rule.legal(m):
        return False
    params = BoundParams(n, m, rule.s_for(m), v)
    return 1.0 - confidence_at_epsilon(params, epsilon, d_max, family) >= target


def min_dimension(n: int, rule: SparsityRule, epsilon: float, confidence_target: float,
                  v: float, d_max: int = 64, family: str = "new",
                  verify_window: int = 16) -> int | None:
    """Smallest ``m <= n`` whose proved confidence at ``epsilon`` reaches the target.

    Doubling from the smallest legal ``m`` finds a bracket, binary search
    narrows it, and the ``verify_window`` values below the result are then
    checked one by one in case confidence is not monotone in ``m``. Returns
    :data:`INFEASIBLE` (``None``) if no ``m <= n`` works.
    """
    if not 0 <= confidence_target < 1:
        raise ValueError(f"confidence target must lie in [0, 1), got {confidence_target}")

    def good(m):
        return _confident(n, m, rule, epsilon, confidence_target, v, d_max, family)

    m_min = rule.smallest_m()
    if m_min > n:
        return INFEASIBLE
    if good(m_min):
        return m_min
    lo, hi = m_min, None
    m = m_min
    while m < n:
        m = min(2 * m, n)
        if good(m):
            hi = m
            break
        lo = m
    if hi is None:
        return INFEASIBLE
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if good(mid):
            hi = mid
        else:
            lo = mid
    for cand in range(hi - 1, max(m_min, hi - verify_window) - 1, -1):
        if good(cand):
            hi = cand
    return hi


def min_sparsity(n: int, m: int, v: float, epsilon: float, confidence_target: float,
                 d_max: int = 64, family: str = "new") -> int:
    """Smallest ``s`` with ``s/m <= 1/2`` reaching the target confidence.

    Scans ``s = 1, 2, ...`` exhaustively; returns ``m`` when no admissible ``s``
    works.
    """
    for s in range(1, m // 2 + 1):
        params = BoundParams(n, m, s, v)
        if 1.0 - confidence_at_epsilon(params, epsilon, d_max, family) >= confidence_target:
            return s
    return m


def union_bound_dimension(pair_count: int, n: int, rule: SparsityRule, epsilon: float,
                          confidence_target: float, v: float, d_max: int = 64,
                          family: str = "new") -> int | None:
    """:func:`min_dimension` with the failure budget split over ``pair_count`` vectors."""
    if pair_count < 1:
        raise ValueError(f"pair_count must be positive, got {pair_count}")
    per_pair = 1.0 - (1.0 - confidence_target) / pair_count
    return min_dimension(n, rule, epsilon, per_pair, v, d_max, family)
