import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from sparse_jl.moments import DomainError
from sparse_jl.oracle import (
    exact_linear_moment,
    exact_row_moment,
    random_unit_squares,
    worst_case_squares,
    worst_case_vector,
)
from sparse_jl.row_bound import (
    BoundParams,
    baseline_row_bound,
    ratio_grid,
    row_bound_value,
    row_moment_bound,
    row_moment_bounds,
    worst_case_linear_moment,
)

probabilities = st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1, 2), max_denominator=1000)


def feasible_v(n, frac):
    return 1 / math.sqrt(n) + frac * (1 - 1 / math.sqrt(n))


def enumerated_linear_moment(x, p, d):
    """E[(sum x_i Y_i)^d] over all 3^n outcomes, in floats."""
    probs = {-1: p / 2, 0: 1 - p, 1: p / 2}
    total = 0.0
    for ys in itertools.product((-1, 0, 1), repeat=len(x)):
        weight = math.prod(probs[y] for y in ys)
        total += weight * sum(a * y for a, y in zip(x, ys)) ** d
    return total


def test_params_validation():
    with pytest.raises(DomainError, match="exceeds"):
        BoundParams(100, 10, 11, 0.5)
    with pytest.raises(DomainError, match="1/2"):
        BoundParams(100, 10, 6, 0.5)
    with pytest.raises(DomainError, match="infeasible"):
        BoundParams(100, 10, 1, 0.05)
    with pytest.raises(DomainError):
        BoundParams(1, 10, 1, 1.0)
    assert BoundParams(100, 10, 5, 0.1).p == Fraction(1, 2)


def test_from_ratio_picks_exact_fraction():
    params = BoundParams.from_ratio(1000, 0.01, 0.2)
    assert (params.m, params.s) == (100, 1)
    assert params.replace(v=0.5).v == 0.5


@given(st.integers(2, 10**6), probabilities, st.floats(0, 1))
def test_order_two_is_four_p(n, p, frac):
    assert row_bound_value(n, p, feasible_v(n, frac), 2) == pytest.approx(4 * float(p), rel=1e-12)


def test_unit_dispersion_quarter():
    assert row_bound_value(10, Fraction(1, 4), 1.0, 2) == pytest.approx(1.0, rel=1e-15)


@given(st.integers(2, 1000), probabilities, st.sampled_from([4, 6, 8, 16]))
def test_unit_dispersion_keeps_only_top_term(n, p, d):
    # at v = 1 only the k = d/2 term survives: T = 4 p^(2/d)
    assert row_bound_value(n, p, 1.0, d) == pytest.approx(4 * float(p) ** (2 / d), rel=1e-12)


def test_small_instance_against_enumeration():
    # T = 4 ||S(x*)||_4^2 with S(x*) enumerated over all 3^4 outcomes
    x = worst_case_vector(4, 0.8)
    expected = 4 * enumerated_linear_moment(x, 0.5, 4) ** 0.5
    assert expected == pytest.approx(3.1919899749216, rel=1e-12)
    assert row_bound_value(4, Fraction(1, 2), 0.8, 4) == pytest.approx(expected, rel=1e-12)


@given(st.integers(2, 7), probabilities, st.sampled_from([2, 4, 6]), st.floats(0, 1))
def test_bound_is_the_linear_moment_at_the_flat_vector(n, p, d, frac):
    v = feasible_v(n, frac)
    x = worst_case_vector(n, v)
    expected = 4 * enumerated_linear_moment(x, float(p), d) ** (2 / d)
    assert row_bound_value(n, p, v, d) == pytest.approx(expected, rel=1e-9)


@given(st.integers(2, 9), probabilities, st.sampled_from([2, 4, 6, 8]), st.integers(1, 8))
def test_exact_flat_moment_matches_table(n, p, d, k):
    v2 = Fraction(1, n) + Fraction(k, 8) * (1 - Fraction(1, n))
    assert worst_case_linear_moment(n, p, v2, d) == exact_linear_moment(
        worst_case_squares(n, v2), p, d, squared=True
    )


@given(st.integers(2, 6), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1, 10)]),
       st.sampled_from([2, 4, 6]), st.integers(0, 2**32 - 1))
def test_bound_dominates_exact_row_moment(n, p, d, seed):
    rng = np.random.default_rng(seed)
    v2 = Fraction(int(rng.integers(0, 9)), 8) * (1 - Fraction(1, n)) + Fraction(1, n)
    squares = random_unit_squares(n, v2, rng)
    exact = float(exact_row_moment(squares, p, d, squared=True)) ** (1 / d)
    assert exact <= row_bound_value(n, p, math.sqrt(v2), d) + 1e-12


@given(st.integers(2, 10**5), probabilities, st.sampled_from([2, 4, 6, 8, 16]),
       st.floats(0, 1), st.floats(0, 1))
def test_nondecreasing_in_v_when_pd_small(n, p, d, a, b):
    assume(p * d <= 1)
    lo, hi = sorted((feasible_v(n, a), feasible_v(n, b)))
    assert row_bound_value(n, p, lo, d) <= row_bound_value(n, p, hi, d) * (1 + 1e-12)


@given(st.integers(2, 10**5), probabilities, probabilities, st.sampled_from([2, 4, 8, 16, 32]),
       st.floats(0, 1))
def test_nondecreasing_in_p(n, p, q, d, frac):
    lo, hi = sorted((p, q))
    v = feasible_v(n, frac)
    assert row_bound_value(n, lo, v, d) <= row_bound_value(n, hi, v, d) * (1 + 1e-12)


def test_table_matches_single_orders():
    params = BoundParams(500, 40, 3, 0.2)
    table = row_moment_bounds(params.n, params.p, params.v, 12)
    for d in (2, 6, 12):
        assert table[d] == pytest.approx(row_moment_bound(params, d), rel=1e-15)


def test_odd_order_rejected():
    with pytest.raises(ValueError):
        row_bound_value(10, Fraction(1, 4), 0.5, 3)


def test_second_baseline_value():
    assert baseline_row_bound(4, 0.01, 0.3, "D2") == pytest.approx(64 / math.log(100), rel=1e-15)
    assert baseline_row_bound(4, 0.01, 0.3, "D2") == pytest.approx(13.897423420904056, rel=1e-12)


@given(st.floats(1e-4, 1.0), st.floats(1e-3, 1.0))
def test_first_baseline_at_order_two(p, v):
    assert baseline_row_bound(2, p, v, "D1") == pytest.approx(16 * math.e * p, rel=1e-12)


@pytest.mark.parametrize("d,p,v,expected", [(8, 0.01, 0.1, 1.7423766359688453),
                                            (16, 0.001, 0.3, 5.128408919670677)])
def test_first_baseline_against_dense_search(d, p, v, expected):
    # expected: maximum over 10^6 + 1 evenly spaced t in [1, d/2]
    assert baseline_row_bound(d, p, v, "D1") == pytest.approx(expected, rel=1e-9)


@given(st.sampled_from([2, 4, 8, 16, 32]), st.floats(1e-4, 1.0), st.floats(1e-3, 1.0))
def test_first_baseline_is_a_supremum(d, p, v):
    ts = np.linspace(1, d / 2, 2001)
    grid = 8 * math.e * np.max((d * v / ts) * (p / (d * v * v)) ** (1 / (2 * ts))) ** 2
    assert baseline_row_bound(d, p, v, "D1") >= grid * (1 - 1e-12)
    assert baseline_row_bound(d, p, v, "D1") <= grid * (1 + 1e-3)


def test_best_falls_back_when_second_undefined():
    assert baseline_row_bound(4, 1.0, 0.1) == baseline_row_bound(4, 1.0, 0.1, "D1")
    with pytest.raises(DomainError):
        baseline_row_bound(4, 1.0, 0.1, "D2")
    with pytest.raises(ValueError):
        baseline_row_bound(4, 0.1, 0.1, "D3")


@given(probabilities, st.floats(0.01, 1))
def test_order_two_ratio(p, v):
    p = float(p)
    assume(16 * math.e * p <= 32 / math.log(1 / p))
    (row,) = ratio_grid(10**4, [p], [v], [2])
    assert row.ratio == pytest.approx(1 / (4 * math.e), rel=1e-12)


def test_grid_edge_cases():
    assert ratio_grid(100, [], [0.5], [2]) == []
    (row,) = ratio_grid(100, [0.7], [0.5], [4])
    assert not row.supported and math.isnan(row.t_new) and math.isnan(row.ratio)
    (row,) = ratio_grid(100, [0.1], [0.05], [4])
    assert not row.supported


def test_grid_interpolates_odd_orders():
    lo, mid, hi = ratio_grid(1000, [0.05], [0.2], [4, 5, 6])
    assert mid.t_new == pytest.approx((lo.t_new + hi.t_new) / 2)
    assert mid.ratio == pytest.approx((lo.ratio + hi.ratio) / 2)
    assert mid.as_dict()["d"] == 5.0
