"""Ground truth for the bounds: exact enumeration and Monte Carlo.

Exact routines enumerate every outcome of the trinary row pattern
``(eta_1, ..., eta_n)`` and return rationals; they are meant for ``n`` up to
about a dozen. Monte-Carlo routines sample whole embeddings and report
Wilson intervals (tails) or batch standard errors (moments).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from statistics import NormalDist

import numpy as np

from . import _fast
from .embedding import _floyd, _signs, trial_seeds
from .moments import DomainError, as_fraction
from .rng import CounterRNG, mix64, split_key
from .row_bound import BoundParams

__all__ = [
    "ResourceError",
    "TailEstimate",
    "MomentEstimate",
    "wilson_interval",
    "worst_case_vector",
    "worst_case_squares",
    "majorizes",
    "robin_hood_transfer",
    "random_unit_squares",
    "exact_linear_moment",
    "exact_row_moment",
    "mc_errors",
    "mc_error_tail",
    "mc_error_moment",
]

MAX_LINEAR_N = 12
MAX_ROW_N = 10


class ResourceError(RuntimeError):
    """Enumeration would be too large."""


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class TailEstimate:
    trials: int
    exceed_count: int
    point_estimate: float
    wilson_99_low: float
    wilson_99_high: float

    @classmethod
    def from_counts(cls, exceed: int, trials: int) -> "TailEstimate":
        lo, hi = wilson_interval(exceed, trials, 0.99)
        return cls(trials, exceed, exceed / trials, lo, hi)


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    trials: int


def worst_case_vector(n: int, v: float) -> np.ndarray:
    """Unit vector with first coordinate ``v`` and the rest equal."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not (1.0 / math.sqrt(n) - 1e-12 <= v <= 1.0 + 1e-12):
        raise DomainError(f"v={v} infeasible for n={n}: need 1/sqrt(n) <= v <= 1")
    v = min(v, 1.0)
    x = np.empty(n)
    x[0] = v
    if n > 1:
        x[1:] = math.sqrt(max(0.0, 1.0 - v * v) / (n - 1))
    return x


def worst_case_squares(n: int, v_squared) -> list[Fraction]:
    """Squared coordinates of :func:`worst_case_vector`, exactly."""
    v2 = as_fraction(v_squared)
    if not Fraction(1, n) <= v2 <= 1:
        raise DomainError(f"v^2={v2} infeasible for n={n}")
    return [v2] + [(1 - v2) / (n - 1)] * (n - 1)


def majorizes(u, w, tol: float = 1e-9) -> bool:
    """True iff the descending prefix sums of ``u`` dominate those of ``w``."""
    if len(u) != len(w):
        raise ValueError(f"length mismatch: {len(u)} vs {len(w)}")
    su, sw = sorted(u, reverse=True), sorted(w, reverse=True)
    exact = all(isinstance(a, (int, Fraction)) for a in su + sw)
    slack = 0 if exact else tol
    if abs(sum(su) - sum(sw)) > slack:
        raise ValueError("majorization is compared on vectors with equal sums")
    pu = pw = 0
    for a, b in zip(su, sw):
        pu += a
        pw += b
        if pu < pw - slack:
            return False
    return True


def robin_hood_transfer(u, rng: np.random.Generator, steps: int = 1):
    """Move mass from larger to smaller coordinates; the result is majorized by ``u``.

    Each step picks ``a > b`` and moves a rational fraction of ``(u_a - u_b)/2``
    from ``a`` to ``b``, which never reverses their order.
    """
    u = [as_fraction(x) for x in u]
    for _ in range(steps):
        i, j = rng.choice(len(u), size=2, replace=False)
        if u[i] == u[j]:
            continue
        a, b = (i, j) if u[i] > u[j] else (j, i)
        share = Fraction(int(rng.integers(1, 9)), 8)
        delta = share * (u[a] - u[b]) / 2
        u[a] -= delta
        u[b] += delta
    return u


def random_unit_squares(n: int, v_squared, rng: np.random.Generator, max_denominator: int = 64,
                        steps: int | None = None):
    """Random rational squared weights summing to one with maximum exactly ``v_squared``.

    Starts from the flat remainder and applies random pairwise transfers that
    keep every other weight in ``[0, v_squared]``. Transfer sizes are rounded
    to multiples of ``1/max_denominator`` (relative to the remainder's own
    denominator) so the rationals stay small.
    """
    v2 = as_fraction(v_squared)
    if not Fraction(1, n) <= v2 <= 1:
        raise DomainError(f"v^2={v2} infeasible for n={n}")
    if n == 1 or v2 == 1:
        return [v2] + [Fraction(0)] * (n - 1)
    weights = [(1 - v2) / (n - 1)] * (n - 1)
    unit = Fraction(1, max_denominator * weights[0].denominator * v2.denominator)
    for _ in range(steps if steps is not None else 4 * n):
        if n < 3:
            break
        i, j = (int(k) for k in rng.choice(n - 1, size=2, replace=False))
        hi = min(weights[i], v2 - weights[j])
        lo = -min(weights[j], v2 - weights[i])
        move = Fraction(round(float(lo + (hi - lo) * rng.random()) / unit)) * unit
        if lo <= move <= hi:
            weights[i] -= move
            weights[j] += move
    order = rng.permutation(n - 1)
    return [v2] + [weights[k] for k in order]


def _trinary_outcomes(n: int, p: Fraction):
    probs = {-1: p / 2, 0: 1 - p, 1: p / 2}
    for ys in itertools.product((-1, 0, 1), repeat=n):
        prob = Fraction(1)
        for y in ys:
            prob *= probs[y]
        yield ys, prob


def _linear_series(squares, p: Fraction, half: int) -> list[Fraction]:
    """Coefficients of ``t^(2a)``, ``a <= half``, in ``E exp(t S)``.

    Summing over all outcomes factorises per coordinate:
    ``E exp(t x_i Y_i) = 1 - p + p cosh(x_i t)``, which depends on ``x_i^2`` only.
    """
    series = [Fraction(1)] + [Fraction(0)] * half
    for u in squares:
        factor = [Fraction(1)] + [p * u**a / factorial(2 * a) for a in range(1, half + 1)]
        series = [sum(series[i] * factor[a - i] for i in range(a + 1)) for a in range(half + 1)]
    return series


def _row_series(squares, p: Fraction, d: int) -> dict[tuple[int, int], Fraction]:
    """Coefficients of ``t^(2k) w^b`` (``k + b <= d``) in ``E exp(t S + w D)``
    with ``D = sum_i x_i^2 eta_i^2``; per coordinate the factor is
    ``1 - p + p exp(w x_i^2) cosh(t x_i)``."""
    keys = [(k, b) for k in range(d + 1) for b in range(d + 1 - k)]
    series = {key: Fraction(0) for key in keys}
    series[0, 0] = Fraction(1)
    for u in squares:
        factor = {(k, b): p * u ** (k + b) / (factorial(2 * k) * factorial(b)) for k, b in keys}
        factor[0, 0] = Fraction(1)
        series = {
            (k, b): sum(series[i, j] * factor[k - i, b - j]
                        for i in range(k + 1) for j in range(b + 1))
            for k, b in keys
        }
    return series


def _check_size(n: int, limit: int) -> None:
    if n > limit:
        raise ResourceError(f"enumeration over 3^{n} outcomes refused (limit n <= {limit})")


def exact_linear_moment(x, p, d: int, squared: bool = False):
    """``E[(sum_i x_i Y_i)^d]`` with ``Y_i`` i.i.d. trinary(``p``).

    With ``squared=False`` all ``3^n`` outcomes are enumerated in the number
    type of ``x`` (exact for rationals). With ``squared=True``, ``x`` holds the
    squares ``x_i^2`` and the same outcome sum is taken in factorised form
    (a product of per-coordinate moment series), so irrational ``x`` with
    rational squares stay exact.
    """
    p = as_fraction(p)
    n = len(x)
    _check_size(n, MAX_LINEAR_N)
    if d < 0:
        raise ValueError(f"order must be nonnegative, got {d}")
    if squared:
        if d % 2:
            return Fraction(0)
        return _linear_series([as_fraction(a) for a in x], p, d // 2)[d // 2] * factorial(d)
    exact = _exact(x)
    total = 0
    for ys, prob in _trinary_outcomes(n, p):
        s = sum(xi * yi for xi, yi in zip(x, ys))
        total += (prob if exact else float(prob)) * s**d
    return total


def _exact(x) -> bool:
    return all(isinstance(a, (int, Fraction)) for a in x)


def exact_row_moment(x, p, d: int, squared: bool = False):
    """``E[E_r(x)^d]`` where ``E_r(x) = sum_{i != j} eta_i eta_j x_i x_j``.

    ``eta_i`` are i.i.d. trinary(``p``), which is the law of
    ``sqrt(s) A_{r,i}`` for one row of the embedding. Same ``squared``
    convention as :func:`exact_linear_moment`.
    """
    p = as_fraction(p)
    n = len(x)
    _check_size(n, MAX_ROW_N)
    if d < 0:
        raise ValueError(f"order must be nonnegative, got {d}")
    if squared:
        # E_r = S^2 - D, expanded binomially against the joint series
        series = _row_series([as_fraction(a) for a in x], p, d)
        return sum(comb(d, k) * (-1) ** (d - k) * series[k, d - k] * factorial(2 * k) * factorial(d - k)
                   for k in range(d + 1))
    exact = _exact(x)
    total = 0
    for ys, prob in _trinary_outcomes(n, p):
        lin = sum(xi * yi for xi, yi in zip(x, ys))
        diag = sum(xi * xi * yi * yi for xi, yi in zip(x, ys))
        total += (prob if exact else float(prob)) * (lin * lin - diag) ** d
    return total


def mc_errors(params: BoundParams, x, trials: int, seed: int, batch: int | None = None,
              replace: bool = False, compiled: bool = True, threads: int = 1) -> np.ndarray:
    """Realised ``E(x)/||x||^2`` over ``trials`` independent embeddings.

    Trial ``t`` uses the embedding ``sample_matrix(n, m, s, seed=trial_seeds(seed, ...)[t])``,
    so any single trial can be replayed on its own. ``compiled`` selects the
    numba kernel when it is available; both paths draw identical matrices.
    Results do not depend on ``threads``.
    """
    n, m, s = params.n, params.m, params.s
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    norm_sq = math.fsum(x * x)
    if norm_sq == 0:
        raise ValueError("x must be nonzero")
    nz = np.flatnonzero(x)
    xv = x[nz]
    out = np.empty(trials)
    if compiled and _fast.mc_kernel is not None:
        roots = mix64(trial_seeds(seed, trials))
        cols = nz.astype(np.int64)
        chunks = np.array_split(np.arange(trials), max(1, min(threads, trials)))

        def run(idx):
            part = np.empty(len(idx))
            _fast.mc_kernel(roots[idx], cols, xv, m, s, replace, norm_sq, part)
            out[idx] = part

        if len(chunks) == 1:
            run(chunks[0])
        else:
            with ThreadPoolExecutor(len(chunks)) as pool:
                list(pool.map(run, chunks))
        return out
    if batch is None:
        batch = max(1, min(trials, 4_000_000 // max(1, len(nz) * s)))
    for start in range(0, trials, batch):
        count = min(batch, trials - start)
        roots = mix64(trial_seeds(seed, count, start))
        rows, signs = _entries_for_columns(roots, nz, m, s, replace)
        offsets = (np.arange(count) * m)[:, None, None]
        weights = signs * xv[None, :, None]
        y = np.bincount((rows + offsets).ravel(), weights=weights.ravel(), minlength=count * m)
        y = y.reshape(count, m)
        out[start:start + count] = ((y * y).sum(axis=1) - s * norm_sq) / (s * norm_sq)
    return out


def _entries_for_columns(roots, cols, m, s, replace):
    if len(cols) == 0:
        return (np.zeros(roots.shape + (0, s), np.int64), np.zeros(roots.shape + (0, s), np.int8))
    keys = split_key(roots[:, None], np.asarray(cols, dtype=np.uint64)[None, :])
    if replace:
        rows = CounterRNG._from_key(keys[..., None]).integers(m, np.arange(s, dtype=np.uint64))
    else:
        rows = _floyd(keys, m, s)
    return rows, _signs(keys, s)


def mc_error_tail(params: BoundParams, epsilon: float, trials: int, seed: int = 0,
                  x=None, threads: int = 1) -> TailEstimate:
    """Fraction of embeddings with ``|E(x)| > epsilon ||x||^2``; ``x`` defaults to
    the worst-case vector at ``params.v``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if x is None:
        x = worst_case_vector(params.n, params.v)
    errors = mc_errors(params, x, trials, seed, threads=threads)
    return TailEstimate.from_counts(int(np.count_nonzero(np.abs(errors) > epsilon)), trials)


def mc_error_moment(params: BoundParams, x, d: int, trials: int, seed: int = 0,
                    batches: int = 10, threads: int = 1) -> MomentEstimate:
    """``(mean |E|^d)^(1/d)`` with a standard error from ``batches`` equal batches."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")
    if trials < batches:
        raise ValueError(f"need at least {batches} trials")
    if x is None:
        x = worst_case_vector(params.n, params.v)
    errors = np.abs(mc_errors(params, x, trials, seed, threads=threads))
    powered = errors**d
    value = float(np.mean(powered)) ** (1.0 / d)
    per_batch = [float(np.mean(chunk)) ** (1.0 / d) for chunk in np.array_split(powered, batches)]
    stderr = float(np.std(per_batch, ddof=1) / math.sqrt(batches))
    return MomentEstimate(value, stderr, trials)
