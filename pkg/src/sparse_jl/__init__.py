"""Moment-based distortion guarantees for sparse sign (sparse JL) embeddings.

The main entry points are :func:`epsilon_bound` (distortion guaranteed at a
given failure probability), :func:`confidence_at_epsilon` (the reverse
query) and :func:`sample_matrix` (draw an embedding).
"""

from .embedding import SparseEmbedding, apply, distortion, sample_matrix
from .moments import DomainError, TrinaryLaw, sum_moments
from .row_bound import BoundParams, baseline_row_bound, row_moment_bound
from .tail_bounds import (
    SparsityRule,
    aggregate_bound,
    confidence_at_epsilon,
    epsilon_bound,
    min_dimension,
    min_sparsity,
    union_bound_dimension,
)

__all__ = [
    "BoundParams",
    "DomainError",
    "SparseEmbedding",
    "SparsityRule",
    "TrinaryLaw",
    "aggregate_bound",
    "apply",
    "baseline_row_bound",
    "confidence_at_epsilon",
    "distortion",
    "epsilon_bound",
    "min_dimension",
    "min_sparsity",
    "row_moment_bound",
    "sample_matrix",
    "sum_moments",
    "union_bound_dimension",
]
