import math

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from sparse_jl.data_io import (
    DegenerateDatasetError,
    Dataset,
    LoadError,
    dispersion,
    dispersion_profile,
    empirical_distortion_profile,
    load,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_toy_pair_has_dispersion_point_eight(tmp_path):
    data = load(write(tmp_path, "toy.csv", "0,0\n3,4\n"))
    profile = dispersion_profile(data)
    assert profile.values.tolist() == [pytest.approx(0.8)]
    assert profile.typical == pytest.approx(0.8)


def test_header_line_is_skipped(tmp_path):
    data = load(write(tmp_path, "toy.csv", "a,b\n0,0\n3,4\n"), header=True)
    assert data.size == 2 and data.dim == 2


def test_matrix_market_matches_csv(tmp_path):
    rng = np.random.default_rng(0)
    dense = rng.standard_normal((12, 7)) * (rng.random((12, 7)) < 0.4)
    np.savetxt(tmp_path / "d.csv", dense, delimiter=",")
    scipy.io.mmwrite(tmp_path / "d.mtx", sp.coo_matrix(dense))
    a, b = load(tmp_path / "d.csv"), load(tmp_path / "d.mtx")
    assert b.is_sparse and b.format == "matrix-market"
    np.testing.assert_allclose(a.dense_rows(np.arange(12)), b.dense_rows(np.arange(12)))
    np.testing.assert_allclose(dispersion_profile(a).values, dispersion_profile(b).values, rtol=1e-12)


@pytest.mark.parametrize("text, message", [
    ("1,2\n3\n", "expected 2 columns"),
    ("1,nan\n", "NaN"),
    ("1,inf\n", "NaN"),
    ("1,x\n", "cannot parse"),
    ("", "empty dataset"),
])
def test_csv_errors(tmp_path, text, message):
    with pytest.raises(LoadError, match=message):
        load(write(tmp_path, "bad.csv", text))


def test_error_reports_line_number(tmp_path):
    with pytest.raises(LoadError, match=":3:"):
        load(write(tmp_path, "bad.csv", "1,2\n3,4\n5\n"))


@pytest.mark.parametrize("header", [
    "%%MatrixMarket matrix array real general",
    "%%MatrixMarket matrix coordinate complex general",
    "%%MatrixMarket matrix coordinate real hermitian",
    "hello",
])
def test_matrix_market_header_errors(tmp_path, header):
    with pytest.raises(LoadError):
        load(write(tmp_path, "bad.mtx", header + "\n2 2 1\n1 1 1.0\n"))


def test_missing_file(tmp_path):
    with pytest.raises(LoadError):
        load(tmp_path / "absent.csv")
    with pytest.raises(ValueError):
        load(tmp_path / "absent.csv", format="parquet")


def test_all_identical_rows_are_degenerate(tmp_path):
    data = load(write(tmp_path, "dup.csv", "1,2\n1,2\n1,2\n"))
    with pytest.raises(DegenerateDatasetError):
        dispersion_profile(data)


def test_duplicates_are_skipped_and_counted(tmp_path):
    data = load(write(tmp_path, "dup.csv", "1,2\n1,2\n4,6\n"))
    profile = dispersion_profile(data)
    assert profile.skipped_pairs == 1
    assert profile.sample_pairs == 2


def test_dispersion_examples():
    assert dispersion([3, 4]) == pytest.approx(0.8)
    assert dispersion(np.ones(9)) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        dispersion(np.zeros(3))


def test_two_dimensional_range():
    # for n = 2 every difference has v in [1/sqrt(2), 1]
    data = Dataset(np.random.default_rng(1).standard_normal((40, 2)), "mem", "dense-csv")
    values = dispersion_profile(data).values
    assert values.min() >= 1 / math.sqrt(2) and values.max() <= 1


matrices = st.integers(2, 12).flatmap(lambda n: st.lists(
    st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=2, max_size=15))


@given(matrices, st.integers(0, 1000))
def test_profile_values_in_range_and_reproducible(rows, seed):
    rows = np.array(rows, dtype=float)
    data = Dataset(rows, "mem", "dense-csv")
    try:
        a = dispersion_profile(data, subsample_size=8, seed=seed)
    except DegenerateDatasetError:
        return
    n = rows.shape[1]
    assert np.all(a.values >= 1 / math.sqrt(n)) and np.all(a.values <= 1)
    b = dispersion_profile(data, subsample_size=8, seed=seed)
    assert a.quantiles == b.quantiles
    qs = [a.quantiles[q] for q in sorted(a.quantiles)]
    assert qs == sorted(qs)


@given(matrices, st.randoms())
def test_typical_value_ignores_row_order_with_full_subsample(rows, rnd):
    rows = np.array(rows, dtype=float)
    order = list(range(len(rows)))
    rnd.shuffle(order)
    shuffled = rows[order]
    try:
        a = dispersion_profile(Dataset(rows, "a", "dense-csv"), subsample_size=100)
    except DegenerateDatasetError:
        return
    b = dispersion_profile(Dataset(shuffled, "b", "dense-csv"), subsample_size=100)
    assert a.typical == pytest.approx(b.typical, rel=1e-12)


def test_sparse_and_dense_profiles_agree():
    dense = np.random.default_rng(2).standard_normal((30, 20)) * (np.random.default_rng(3).random((30, 20)) < 0.3)
    a = dispersion_profile(Dataset(dense, "d", "dense-csv"), subsample_size=20, seed=4)
    b = dispersion_profile(Dataset(sp.csr_array(dense), "s", "matrix-market"), subsample_size=20, seed=4)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12)
    assert a.skipped_pairs == b.skipped_pairs


def test_distortion_table_without_pairs_is_empty():
    data = Dataset(np.eye(5), "eye", "dense-csv")
    assert empirical_distortion_profile(data, 4, 2, 0, 3, [0.5]) == []


def test_distortion_table_rows():
    data = Dataset(np.random.default_rng(5).standard_normal((50, 200)), "g", "dense-csv")
    table = empirical_distortion_profile(data, 40, 4, 30, 5, [0.05, 0.5, 100.0], seed=1)
    assert [row.epsilon for row in table] == [0.05, 0.5, 100.0]
    rates = [row.exceed_rate for row in table]
    assert rates == sorted(rates, reverse=True)
    assert table[-1].exceed_count == 0
    for row in table:
        assert row.trials == 150
        assert row.wilson_99_low <= row.exceed_rate <= row.wilson_99_high
        assert 0 <= row.delta_typical <= 1 and 0 <= row.delta_pair_mean <= 1
    again = empirical_distortion_profile(data, 40, 4, 30, 5, [0.05, 0.5, 100.0], seed=1)
    assert again == table
