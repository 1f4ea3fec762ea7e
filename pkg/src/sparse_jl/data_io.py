"""Datasets, dispersion profiles and empirical distortion tables.

Two on-disk formats are supported: dense CSV (one vector per line) and
Matrix Market coordinate files (one vector per matrix row).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .embedding import sample_matrix
from .oracle import wilson_interval
from .row_bound import BoundParams
from .tail_bounds import confidence_at_epsilon

__all__ = [
    "FORMATS",
    "LoadError",
    "DegenerateDatasetError",
    "Dataset",
    "DispersionProfile",
    "DistortionRow",
    "load",
    "dispersion",
    "dispersion_profile",
    "empirical_distortion_profile",
]

FORMATS = ("dense-csv", "matrix-market")
QUANTILES = (1, 5, 25, 50, 75, 95, 99)
_MM_FIELDS = ("real", "integer", "pattern")
_MM_SYMMETRY = ("general", "symmetric")


class LoadError(ValueError):
    """A dataset file could not be parsed."""


class DegenerateDatasetError(ValueError):
    """Every sampled pair of rows is identical."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """``N`` vectors of length ``n``, stored densely or as CSR rows."""

    rows: np.ndarray | sp.csr_array = field(repr=False)
    source: str
    format: str

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.rows)

    def dense_rows(self, index) -> np.ndarray:
        block = self.rows[np.asarray(index)]
        return block.toarray() if sp.issparse(block) else np.asarray(block, dtype=np.float64)


def _infer_format(path: Path) -> str:
    return "matrix-market" if path.suffix.lower() in (".mtx", ".mm") else "dense-csv"


def _load_csv(path: Path, header: bool) -> np.ndarray:
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as handle:
        for lineno, record in enumerate(csv.reader(handle), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError as exc:
                raise LoadError(f"{path}:{lineno}: cannot parse number ({exc})") from None
            if not all(math.isfinite(value) for value in values):
                raise LoadError(f"{path}:{lineno}: NaN or infinite entry")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise LoadError(f"{path}:{lineno}: expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise LoadError(f"{path}: empty dataset")
    return np.array(rows, dtype=np.float64)


def _check_mm_header(path: Path) -> None:
    with path.open(encoding="utf-8") as handle:
        first = handle.readline()
    if not first.strip():
        raise LoadError(f"{path}: empty dataset")
    tokens = first.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise LoadError(f"{path}:1: not a Matrix Market header: {first.strip()!r}")
    if tokens[2] != "coordinate":
        raise LoadError(f"{path}:1: only coordinate format is supported, got {tokens[2]!r}")
    if tokens[3] not in _MM_FIELDS:
        raise LoadError(f"{path}:1: unsupported field {tokens[3]!r}")
    if tokens[4] not in _MM_SYMMETRY:
        raise LoadError(f"{path}:1: unsupported symmetry {tokens[4]!r}")


def _load_mm(path: Path) -> sp.csr_array:
    _check_mm_header(path)
    try:
        matrix = scipy.io.mmread(path)
    except (ValueError, IndexError, OSError) as exc:
        raise LoadError(f"{path}: malformed Matrix Market body ({exc})") from None
    matrix = sp.csr_array(matrix, dtype=np.float64)
    if matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise LoadError(f"{path}: empty dataset")
    if not np.all(np.isfinite(matrix.data)):
        raise LoadError(f"{path}: NaN or infinite entry")
    matrix.sum_duplicates()
    return matrix


def load(path, format: str | None = None, header: bool = False) -> Dataset:
    """Read a dataset; ``format`` is inferred from the suffix when omitted
    (``.mtx``/``.mm`` is Matrix Market, anything else dense CSV)."""
    path = Path(path)
    if format is None:
        format = _infer_format(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; choose from {FORMATS}")
    if not path.is_file():
        raise LoadError(f"{path}: no such file")
    rows = _load_csv(path, header) if format == "dense-csv" else _load_mm(path)
    return Dataset(rows, str(path), format)


def dispersion(x) -> float:
    """``||x||_inf / ||x||_2`` for a nonzero vector."""
    x = np.asarray(x, dtype=np.float64)
    norm = math.sqrt(math.fsum(x * x))
    if norm == 0.0:
        raise ValueError("dispersion is undefined for the zero vector")
    return float(np.max(np.abs(x))) / norm


@dataclass(frozen=True)
class DispersionProfile:
    """Dispersion of pairwise differences within a row subsample.

    ``quantiles`` maps a percentage to the matching quantile of ``values``;
    ``typical`` is the median.
    """

    dim: int
    subsample: tuple[int, ...]
    values: np.ndarray = field(repr=False)
    skipped_pairs: int
    quantiles: dict[int, float]
    typical: float

    @property
    def sample_pairs(self) -> int:
        return len(self.values)


def _pair_dispersions(block, n: int) -> tuple[np.ndarray, int]:
    """Dispersions over all pairs ``i < j`` of rows in ``block``, in
    lexicographic pair order, and the number of zero differences."""
    values = []
    skipped = 0
    for i in range(block.shape[0] - 1):
        if sp.issparse(block):
            rest = block.shape[0] - i - 1
            diff = sp.csr_array(block[i + 1:] - block[np.full(rest, i)])
            sq = np.asarray(diff.multiply(diff).sum(axis=1)).ravel()
            peak = np.asarray(abs(diff).max(axis=1).toarray()).ravel()
        else:
            diff = block[i + 1:] - block[i]
            sq = np.einsum("ij,ij->i", diff, diff)
            peak = np.max(np.abs(diff), axis=1)
        live = sq > 0
        skipped += int(np.count_nonzero(~live))
        values.append(peak[live] / np.sqrt(sq[live]))
    merged = np.concatenate(values) if values else np.empty(0)
    # rounding can push a flat difference a hair outside the feasible range
    return np.clip(merged, 1.0 / math.sqrt(n), 1.0), skipped


def _subsample(size: int, count: int, seed: int) -> np.ndarray:
    if count >= size:
        return np.arange(size)
    return np.sort(np.random.default_rng(seed).choice(size, count, replace=False))


def dispersion_profile(dataset: Dataset, subsample_size: int = 250, seed: int = 0) -> DispersionProfile:
    """Profile of ``v`` over all distinct pairs of a uniform row subsample.

    The subsample indexes rows in file order. Identical pairs are skipped
    and counted in ``skipped_pairs``.
    """
    if dataset.size < 2:
        raise ValueError("need at least two rows")
    if subsample_size < 2:
        raise ValueError(f"subsample_size must be at least 2, got {subsample_size}")
    index = _subsample(dataset.size, subsample_size, seed)
    block = dataset.rows[index]
    if not sp.issparse(block):
        block = np.asarray(block, dtype=np.float64)
    values, skipped = _pair_dispersions(block, dataset.dim)
    if len(values) == 0:
        raise DegenerateDatasetError("degenerate dataset: every sampled pair is identical")
    quantiles = {q: float(np.quantile(values, q / 100.0)) for q in QUANTILES}
    return DispersionProfile(dataset.dim, tuple(int(i) for i in index), values, skipped,
                             quantiles, quantiles[50])


@dataclass(frozen=True)
class DistortionRow:
    """Empirical and proved failure rates at one distortion level.

    ``delta_typical`` is the proved bound at the dataset's typical
    dispersion; ``delta_pair_mean`` averages the proved bound at each pair's
    own dispersion.
    """

    epsilon: float
    trials: int
    exceed_count: int
    exceed_rate: float
    wilson_99_low: float
    wilson_99_high: float
    delta_typical: float
    delta_pair_mean: float


def _sample_pairs(size: int, pairs: int, rng: np.random.Generator) -> np.ndarray:
    first = rng.integers(0, size, pairs)
    second = (first + rng.integers(1, size, pairs)) % size
    return np.stack([first, second], axis=1)


def empirical_distortion_profile(dataset: Dataset, m: int, s: int, pairs: int, seeds: int,
                                 epsilon_grid, seed: int = 0, typical_v: float | None = None,
                                 variant: str = "column-wor", d_max: int = 64) -> list[DistortionRow]:
    """Tabulate how often ``|E(x)|/||x||^2`` exceeds each ``epsilon`` for
    differences ``x`` of random row pairs, over ``seeds`` embeddings.

    Pairs with zero difference are dropped. ``typical_v`` defaults to the
    median of :func:`dispersion_profile` with the same seed.
    """
    if pairs < 0 or seeds < 1:
        raise ValueError(f"need pairs >= 0 and seeds >= 1, got pairs={pairs}, seeds={seeds}")
    epsilon_grid = [float(e) for e in epsilon_grid]
    if any(not e > 0 for e in epsilon_grid):
        raise ValueError("every epsilon must be positive")
    n = dataset.dim
    BoundParams(n, m, s, 1.0)
    if pairs == 0 or dataset.size < 2:
        return []
    rng = np.random.default_rng(seed)
    chosen = _sample_pairs(dataset.size, pairs, rng)
    diffs = dataset.dense_rows(chosen[:, 0]) - dataset.dense_rows(chosen[:, 1])
    sq = np.einsum("ij,ij->i", diffs, diffs)
    diffs, sq = diffs[sq > 0], sq[sq > 0]
    if len(sq) == 0:
        return []
    pair_v = np.clip(np.max(np.abs(diffs), axis=1) / np.sqrt(sq), 1.0 / math.sqrt(n), 1.0)
    if typical_v is None:
        typical_v = dispersion_profile(dataset, seed=seed).typical

    errors = np.empty((seeds, len(sq)))
    for k in range(seeds):
        emb = sample_matrix(n, m, s, variant, seed=seed + k)
        y = emb.to_scipy() @ diffs.T
        errors[k] = (np.einsum("ij,ij->j", y, y) - sq) / sq
    errors = np.abs(errors).ravel()

    table = []
    for eps in epsilon_grid:
        exceed = int(np.count_nonzero(errors > eps))
        low, high = wilson_interval(exceed, len(errors))
        typical = confidence_at_epsilon(BoundParams(n, m, s, typical_v), eps, d_max)
        per_pair = [confidence_at_epsilon(BoundParams(n, m, s, float(v)), eps, d_max) for v in pair_v]
        table.append(DistortionRow(eps, len(errors), exceed, exceed / len(errors), low, high,
                                   typical, float(np.mean(per_pair))))
    return table
