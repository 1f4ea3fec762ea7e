"""Sparse sign embeddings: sampling, application and realised distortion."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .rng import MASK64, CounterRNG, split_key

__all__ = [
    "VARIANTS",
    "SparseEmbedding",
    "sample_matrix",
    "sample_column_entries",
    "trial_seeds",
    "apply",
    "distortion",
]

VARIANTS = ("column-wor", "row-wor", "with-replacement")
_ROW_DOMAIN = MASK64  # split index reserved for per-row keys


def _floyd(keys: np.ndarray, universe: int, s: int) -> np.ndarray:
    """``s`` distinct indices in ``[0, universe)`` per key (Floyd's algorithm,
    vectorised over the key array)."""
    rng = CounterRNG._from_key(keys)
    out = np.empty(keys.shape + (s,), dtype=np.int64)
    for idx, j in enumerate(range(universe - s, universe)):
        t = rng.integers(j + 1, idx)
        if idx:
            taken = (out[..., :idx] == t[..., None]).any(axis=-1)
            t = np.where(taken, j, t)
        out[..., idx] = t
    return out


def _signs(keys: np.ndarray, s: int) -> np.ndarray:
    rng = CounterRNG._from_key(keys[..., None])
    return rng.signs(np.arange(s, 2 * s, dtype=np.uint64))


def sample_column_entries(root_keys, n: int, m: int, s: int, replace: bool = False):
    """Rows and signs of every column for one or more root keys.

    ``root_keys`` has any shape ``K``; the result arrays have shape
    ``K + (n, s)``. Column ``i`` under root key ``r`` depends only on
    ``(r, i)``.
    """
    root_keys = np.asarray(root_keys, dtype=np.uint64)
    keys = split_key(root_keys[..., None], np.arange(n, dtype=np.uint64))
    if replace:
        rows = CounterRNG._from_key(keys[..., None]).integers(m, np.arange(s, dtype=np.uint64))
    else:
        rows = _floyd(keys, m, s)
    return rows, _signs(keys, s)


def trial_seeds(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Independent 64-bit seeds for trials ``start .. start+count-1``."""
    base = CounterRNG(seed).key
    return split_key(base, np.arange(start, start + count, dtype=np.uint64))


@dataclass(frozen=True, eq=False)
class SparseEmbedding:
    """An ``m x n`` sparse sign matrix stored column-compressed.

    ``indices[indptr[i]:indptr[i+1]]`` are the rows hit by column ``i`` and
    ``signs`` the matching +-1 values; every applied value is
    ``sign * scale``.
    """

    n: int
    m: int
    s: int
    variant: str
    seed: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)

    @property
    def inverse_scale_sq(self) -> float:
        """``1 / scale**2``; chosen so that ``E ||Ax||^2 = ||x||^2``."""
        if self.variant == "row-wor":
            return self.m * self.s / self.n
        return self.s

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.inverse_scale_sq)

    def column(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.signs[lo:hi]

    def to_scipy(self) -> sp.csc_matrix:
        data = self.signs.astype(np.float64) * self.scale
        return sp.csc_matrix((data, self.indices, self.indptr), shape=(self.m, self.n))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def _entry_columns(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.indptr))

    def unscaled_apply(self, x) -> np.ndarray:
        """``A x / scale`` accumulated column by column in stored order."""
        cols, vals = _as_columns(x, self.n)
        if cols is None:
            entry_cols = self._entry_columns()
            weights = self.signs * vals[entry_cols]
            return np.bincount(self.indices, weights=weights, minlength=self.m)
        starts, stops = self.indptr[cols], self.indptr[cols + 1]
        counts = stops - starts
        entry = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
        weights = self.signs[entry] * np.repeat(vals, counts)
        return np.bincount(self.indices[entry], weights=weights, minlength=self.m)

    def apply(self, x) -> np.ndarray:
        return self.unscaled_apply(x) * self.scale

    def error(self, x) -> float:
        """``E(x) = ||Ax||^2 - ||x||^2``."""
        y = self.unscaled_apply(x)
        k = self.inverse_scale_sq
        return (math.fsum(y * y) - k * _sq_norm(x, self.n)) / k

    def distortion(self, x) -> float:
        """Relative squared-norm error ``||Ax||^2 / ||x||^2 - 1``."""
        norm_sq = _sq_norm(x, self.n)
        if norm_sq == 0.0:
            raise ValueError("distortion is undefined for the zero vector")
        y = self.unscaled_apply(x)
        k = self.inverse_scale_sq
        return (math.fsum(y * y) - k * norm_sq) / (k * norm_sq)

    def to_record(self) -> dict:
        return {
            "format": "sparse-jl-embedding",
            "version": 1,
            "n": self.n,
            "m": self.m,
            "s": self.s,
            "variant": self.variant,
            "seed": self.seed,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SparseEmbedding":
        if record.get("format") != "sparse-jl-embedding":
            raise ValueError("not a sparse-jl embedding record")
        if record.get("version") != 1:
            raise ValueError(f"unsupported record version {record.get('version')!r}")
        return sample_matrix(record["n"], record["m"], record["s"], record["variant"], record["seed"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SparseEmbedding":
        return cls.from_record(json.loads(Path(path).read_text(encoding="utf-8")))


def _as_columns(x, n: int):
    """``(None, dense)`` for dense input, ``(cols, vals)`` for sparse input."""
    if sp.issparse(x):
        x = sp.coo_array(x)
        if x.ndim == 2:
            if 1 not in x.shape or max(x.shape) != n:
                raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
            idx = x.col if x.shape[0] == 1 else x.row
        else:
            if x.shape[0] != n:
                raise ValueError(f"expected a vector of length {n}, got length {x.shape[0]}")
            idx = x.coords[0]
        order = np.argsort(idx, kind="stable")
        return np.asarray(idx[order], dtype=np.int64), np.asarray(x.data[order], dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return None, x


def _sq_norm(x, n: int) -> float:
    cols, vals = _as_columns(x, n)
    return math.fsum(vals * vals)


def sample_matrix(n: int, m: int, s: int, variant: str = "column-wor", seed: int = 0) -> SparseEmbedding:
    """Sample an embedding with ``s`` signed entries per column (or per row for
    ``row-wor``), reproducible from ``seed``."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be positive, got n={n}, m={m}")
    limit = n if variant == "row-wor" else m
    if variant != "with-replacement" and not 1 <= s <= limit:
        raise ValueError(f"s={s} out of range [1, {limit}] for variant {variant}")
    if variant == "with-replacement" and s < 1:
        raise ValueError(f"s must be positive, got {s}")
    seed = int(seed) & MASK64
    root = CounterRNG(seed).key

    if variant == "row-wor":
        row_keys = split_key(split_key(root, _ROW_DOMAIN), np.arange(m, dtype=np.uint64))
        cols = _floyd(row_keys, n, s)
        signs = _signs(row_keys, s)
        rows = np.broadcast_to(np.arange(m)[:, None], cols.shape)
        order = np.lexsort((rows.ravel(), cols.ravel()))
        indices = rows.ravel()[order]
        signs = signs.ravel()[order]
        indptr = np.concatenate([[0], np.cumsum(np.bincount(cols.ravel(), minlength=n))])
    else:
        rows, signs = sample_column_entries(root, n, m, s, replace=variant == "with-replacement")
        indices = rows.reshape(-1)
        signs = signs.reshape(-1)
        indptr = np.arange(n + 1, dtype=np.int64) * s
    return SparseEmbedding(n, m, s, variant, seed, indptr.astype(np.int64), indices.astype(np.int64),
                           signs.astype(np.int8))


def apply(embedding: SparseEmbedding, x) -> np.ndarray:
    return embedding.apply(x)


def distortion(embedding: SparseEmbedding, x) -> float:
    return embedding.distortion(x)
