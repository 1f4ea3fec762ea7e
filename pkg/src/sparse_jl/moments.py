"""Exact moments of sums of i.i.d. symmetric trinary variables.

A trinary variable ``Y`` takes the values +1 and -1 with probability ``p/2``
each and 0 otherwise. Row errors of a sparse sign embedding reduce to linear
forms in such variables, and the scaled difference of two binomials that
appears in the row bound has the same law as a normalised sum of them.

Exact tables are computed in :class:`fractions.Fraction` arithmetic. The
float route used by the bounds expands ``E[S^d]`` as a sum of positive
terms over the number of distinct summands involved, so it has no
cancellation either and agrees with the exact tables to rounding.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from numbers import Rational

import numpy as np

__all__ = [
    "DomainError",
    "TrinaryLaw",
    "MomentTable",
    "as_fraction",
    "trinary_moments",
    "sum_moments",
    "even_word_counts",
    "normalized_sum_moments",
    "binom_diff_moment",
    "binom_diff_moments",
]


class DomainError(ValueError):
    """A parameter lies outside the region where a bound is defined."""


def as_fraction(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Floats go through their shortest ``repr`` so that ``0.01`` becomes
    ``1/100`` rather than the nearest dyadic rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _check_probability(p: Fraction) -> None:
    if not (0 < p <= Fraction(1, 2)):
        raise DomainError(
            f"p={p} outside (0, 1/2]: no sigma with sigma^2 + (1-sigma)^2 = 1-p, "
            "so the trinary law has no Bernoulli-difference representation"
        )


@dataclass(frozen=True)
class TrinaryLaw:
    """Symmetric law on {-1, 0, 1} with ``P(Y = +-1) = p/2``."""

    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        _check_probability(self.p)

    @property
    def sigma(self) -> float:
        """Bernoulli parameter with ``Y ~ B1 - B2``, ``B1, B2 ~ Bern(sigma)``."""
        return (1.0 - (1.0 - 2.0 * float(self.p)) ** 0.5) / 2.0

    def pmf(self) -> dict[int, Fraction]:
        return {-1: self.p / 2, 0: 1 - self.p, 1: self.p / 2}

    def moments(self, d_max: int) -> list[Fraction]:
        return trinary_moments(self.p, d_max)


@dataclass(frozen=True)
class MomentTable:
    """Raw moments ``E[S^j]``, ``j = 0..d_max``, of ``S = Y_1 + ... + Y_count``."""

    p: Fraction
    count: int
    moments: tuple[Fraction, ...]

    @property
    def d_max(self) -> int:
        return len(self.moments) - 1

    def __getitem__(self, j: int) -> Fraction:
        return self.moments[j]


def _check_order(d_max: int) -> None:
    if d_max < 0 or d_max % 2:
        raise ValueError(f"d_max must be a nonnegative even integer, got {d_max}")


def trinary_moments(p, d_max: int) -> list[Fraction]:
    """Raw moments ``E[Y^j]`` for ``j = 0..d_max``: 1, then ``p`` at even orders."""
    p = as_fraction(p)
    _check_probability(p)
    _check_order(d_max)
    return [Fraction(1)] + [p if j % 2 == 0 else Fraction(0) for j in range(1, d_max + 1)]


@lru_cache(maxsize=256)
def _trinary_cumulants(p: Fraction, d_max: int) -> tuple[Fraction, ...]:
    mu = trinary_moments(p, d_max)
    kappa = [Fraction(0)] * (d_max + 1)
    # kappa_n = mu_n - sum_{k<n} C(n-1, k-1) kappa_k mu_{n-k}; odd terms vanish
    for n in range(2, d_max + 1, 2):
        acc = mu[n]
        for k in range(2, n, 2):
            acc -= comb(n - 1, k - 1) * kappa[k] * mu[n - k]
        kappa[n] = acc
    return tuple(kappa)


def _moments_from_cumulants(kappa: list[Fraction]) -> tuple[Fraction, ...]:
    d_max = len(kappa) - 1
    mu = [Fraction(0)] * (d_max + 1)
    mu[0] = Fraction(1)
    for n in range(2, d_max + 1, 2):
        acc = Fraction(0)
        for k in range(2, n + 1, 2):
            acc += comb(n - 1, k - 1) * kappa[k] * mu[n - k]
        mu[n] = acc
    return tuple(mu)


_TABLE_CACHE: dict[tuple[Fraction, int], MomentTable] = {}
_TABLE_LOCK = threading.Lock()


def sum_moments(p, count: int, d_max: int) -> MomentTable:
    """Exact raw moments of a sum of ``count`` i.i.d. trinary variables.

    Single-variable moments are turned into cumulants, the cumulants are
    multiplied by ``count`` (cumulants add over independent summands), and
    the result is turned back into raw moments. Tables are cached per
    ``(p, count)`` and grown on demand.
    """
    p = as_fraction(p)
    _check_probability(p)
    _check_order(d_max)
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")

    key = (p, count)
    with _TABLE_LOCK:
        cached = _TABLE_CACHE.get(key)
    if cached is not None and cached.d_max >= d_max:
        if cached.d_max == d_max:
            return cached
        return MomentTable(p, count, cached.moments[: d_max + 1])

    kappa = [count * k for k in _trinary_cumulants(p, d_max)]
    table = MomentTable(p, count, _moments_from_cumulants(kappa))
    with _TABLE_LOCK:
        current = _TABLE_CACHE.get(key)
        if current is None or current.d_max < d_max:
            if len(_TABLE_CACHE) > 4096:
                _TABLE_CACHE.clear()
            _TABLE_CACHE[key] = table
    return table


@lru_cache(maxsize=16)
def even_word_counts(d_max: int) -> tuple[tuple[int, ...], ...]:
    """``a[d][j]``: words of length ``d`` over ``j`` given letters in which every
    letter occurs a positive even number of times.

    ``E[(Y_1 + ... + Y_N)^d] = sum_j C(N, j) p^j a[d][j]`` since a monomial
    has expectation ``p^j`` when its ``j`` distinct variables all carry even
    exponents and zero otherwise.
    """
    _check_order(d_max)
    a = [[0] * (d_max // 2 + 1) for _ in range(d_max + 1)]
    a[0][0] = 1
    for d in range(2, d_max + 1, 2):
        for j in range(1, d // 2 + 1):
            # positions of the last letter, then the rest
            a[d][j] = sum(comb(d, e) * a[d - e][j - 1] for e in range(2, d - 2 * j + 3, 2))
    return tuple(tuple(row) for row in a)


@lru_cache(maxsize=16)
def _log_word_table(d_max: int) -> np.ndarray:
    """``log(a[d][j] / j!)`` for even ``d``; ``-inf`` where the count is zero."""
    counts = even_word_counts(d_max)
    half = d_max // 2
    table = np.full((half + 1, half + 1), -np.inf)
    for k in range(half + 1):
        for j in range(1, k + 1):
            table[k, j] = math.log(counts[2 * k][j]) - math.lgamma(j + 1)
    table[0, 0] = 0.0
    return table


def normalized_sum_moments(p, count: int, d_max: int) -> np.ndarray:
    """``E[((Y_1 + ... + Y_count) / sqrt(count))^j]`` for ``j = 0..d_max`` in floats.

    Each even moment is summed in log space from the positive terms
    ``C(count, j) p^j a[d][j] / count^(d/2)``; odd moments are zero.
    """
    exact_p = as_fraction(p)
    _check_probability(exact_p)
    p = float(exact_p)
    _check_order(d_max)
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    half = d_max // 2
    j = np.arange(half + 1)
    # log(C(count, j) j! / count^j), exact to rounding even for huge count
    # (terms with j > count vanish: the factor 1 - i/count hits zero)
    with np.errstate(divide="ignore"):
        factors = np.log1p(-np.minimum(np.arange(half) / count, 1.0))
    shrink = np.concatenate([[0.0], np.cumsum(factors)])
    k = j[:, None]
    logs = (_log_word_table(d_max) + shrink[None, :] + j[None, :] * math.log(p)
            + (j[None, :] - k) * math.log(count))
    peak = np.max(logs, axis=1, keepdims=True)
    even = np.exp(peak[:, 0]) * np.exp(logs - peak).sum(axis=1)
    out = np.zeros(d_max + 1)
    out[::2] = even
    return out


def binom_diff_moment(n: int, p, j: int) -> float:
    """``E[(B' - B'')^j]`` with ``B', B'' ~ Binom(n-1, sigma) / sqrt(n-1)`` i.i.d.

    Uses ``B' - B'' = (Y_1 + ... + Y_{n-1}) / sqrt(n-1)`` in law.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if j < 0:
        raise ValueError(f"order must be nonnegative, got {j}")
    if j % 2:
        _check_probability(as_fraction(p))
        return 0.0
    return float(normalized_sum_moments(p, n - 1, j)[j])


def binom_diff_moments(n: int, p, d_max: int) -> list[float]:
    """All orders ``0..d_max`` of :func:`binom_diff_moment` from one table."""
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    return normalized_sum_moments(p, n - 1, d_max).tolist()
