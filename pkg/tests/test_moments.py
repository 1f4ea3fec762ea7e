import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparse_jl.moments import (
    DomainError,
    TrinaryLaw,
    as_fraction,
    binom_diff_moment,
    binom_diff_moments,
    even_word_counts,
    normalized_sum_moments,
    sum_moments,
    trinary_moments,
)

probabilities = st.fractions(min_value=Fraction(1, 64), max_value=Fraction(1, 2), max_denominator=64)


def brute_sum_moment(p, count, j):
    """E[(Y_1 + ... + Y_count)^j] by listing all 3^count outcomes."""
    probs = {-1: p / 2, 0: 1 - p, 1: p / 2}
    total = Fraction(0)
    for ys in itertools.product((-1, 0, 1), repeat=count):
        weight = Fraction(1)
        for y in ys:
            weight *= probs[y]
        total += weight * sum(ys) ** j
    return total


def binomial_difference_moment(count, sigma, j):
    """E[(B' - B'')^j] for independent B', B'' ~ Binom(count, sigma), as floats."""
    pmf = [comb(count, k) * sigma**k * (1 - sigma) ** (count - k) for k in range(count + 1)]
    return sum(pa * pb * (a - b) ** j for a, pa in enumerate(pmf) for b, pb in enumerate(pmf))


def test_trinary_moments_half():
    assert trinary_moments(Fraction(1, 2), 4) == [1, 0, Fraction(1, 2), 0, Fraction(1, 2)]


def test_trinary_moments_quarter():
    assert trinary_moments(Fraction(1, 4), 2) == [1, 0, Fraction(1, 4)]


@pytest.mark.parametrize("p", [Fraction(3, 5), Fraction(0), Fraction(-1, 4), 1])
def test_probability_out_of_range(p):
    with pytest.raises(DomainError, match="sigma"):
        trinary_moments(p, 2)


def test_sum_fourth_moment_two_terms():
    # P(S=+-2) = 1/16, P(S=+-1) = 1/4, P(S=0) = 3/8
    assert sum_moments(Fraction(1, 2), 2, 4)[4] == Fraction(5, 2)
    assert brute_sum_moment(Fraction(1, 2), 2, 4) == Fraction(5, 2)


def test_binom_diff_fourth_moment_n3():
    # B', B'' ~ Binom(2, 1/2) when p = 1/2; W = (B' - B'') / sqrt(2)
    expected = Fraction(binomial_difference_moment(2, Fraction(1, 2), 4)) / 4
    assert expected == Fraction(5, 8)
    assert binom_diff_moment(3, Fraction(1, 2), 4) == pytest.approx(0.625, rel=1e-15)


def test_float_probability_is_read_exactly():
    assert as_fraction(0.25) == Fraction(1, 4)
    assert as_fraction(0.1) == Fraction(1, 10)
    assert sum_moments(0.25, 3, 4)[4] == sum_moments(Fraction(1, 4), 3, 4)[4]


def test_law_is_normalised():
    law = TrinaryLaw(Fraction(1, 3))
    assert sum(law.pmf().values()) == 1
    assert 2 * law.sigma * (1 - law.sigma) == pytest.approx(1 / 3, rel=1e-14)


@given(probabilities, st.integers(1, 5), st.integers(0, 8))
def test_sum_moments_match_enumeration(p, count, j):
    assert sum_moments(p, count, 8)[j] == brute_sum_moment(p, count, j)


@given(probabilities, st.integers(1, 10**6))
def test_second_moment_is_count_times_p(p, count):
    table = sum_moments(p, count, 6)
    assert table[2] == count * p
    assert table[1] == table[3] == table[5] == 0


@given(probabilities, st.integers(2, 12), st.sampled_from([2, 4, 6, 8]))
def test_binomial_difference_representation(p, n, j):
    # dual route: the trinary sum has the law of B' - B'' with 2 sigma (1 - sigma) = p
    sigma = TrinaryLaw(p).sigma
    expected = binomial_difference_moment(n - 1, sigma, j) / (n - 1) ** (j / 2)
    assert binom_diff_moment(n, p, j) == pytest.approx(expected, rel=1e-9)


@given(probabilities, st.integers(2, 50))
def test_normalised_second_moment_is_p(p, n):
    assert binom_diff_moment(n, p, 2) == pytest.approx(float(p), rel=1e-15)
    assert binom_diff_moment(n, p, 5) == 0.0


def test_table_grows_on_demand():
    p = Fraction(1, 7)
    small = sum_moments(p, 9, 4)
    large = sum_moments(p, 9, 12)
    assert large.d_max >= 12
    assert [large[j] for j in range(5)] == [small[j] for j in range(5)]
    assert binom_diff_moments(10, p, 6)[6] == pytest.approx(float(large[6]) / 9**3, rel=1e-15)


def test_large_count_is_fast_and_finite():
    values = binom_diff_moments(10**6, Fraction(1, 1000), 30)
    assert all(v >= 0 for v in values[::2])
    # approaches the Gaussian moments (j-1)!! * p^(j/2) as count grows
    assert values[4] == pytest.approx(3 * 1e-6, rel=1e-2)


def test_even_word_counts_small():
    a = even_word_counts(6)
    assert a[2][1] == 1 and a[4][1] == 1
    assert a[4][2] == 6  # choose the two positions of the first letter
    assert a[6][3] == 90  # 6! / (2!)^3
    assert a[6][2] == 30  # split 2+4 or 4+2: 2 * C(6, 2)


@given(probabilities, st.integers(1, 6), st.sampled_from([2, 4, 6, 8]))
def test_word_expansion_matches_enumeration(p, count, j):
    a = even_word_counts(j)
    total = sum(comb(count, k) * p**k * a[j][k] for k in range(1, j // 2 + 1))
    assert total == brute_sum_moment(p, count, j)


@given(probabilities, st.integers(1, 10**7), st.sampled_from([8, 32, 64]))
def test_float_moments_match_exact_tables(p, count, d_max):
    floats = normalized_sum_moments(p, count, d_max)
    exact = sum_moments(p, count, d_max)
    for j in range(0, d_max + 1, 2):
        assert floats[j] == pytest.approx(float(exact[j] / Fraction(count) ** (j // 2)), rel=1e-12)
    assert not floats[1::2].any()
