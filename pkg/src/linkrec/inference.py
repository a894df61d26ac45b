"""Scoring a live session prefix against a trained item-item matrix.

The prefix becomes a sparse decayed vector (most recent item weight 1,
older items damped by exp(-age / delta_inf)); scores are one
vector-matrix product over the model rows the prefix touches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .solvers import ItemItemModel


@dataclass
class InferenceVector:
    """Sparse decayed representation of a session prefix."""

    indices: np.ndarray
    weights: np.ndarray

    @property
    def nnz(self) -> int:
        return len(self.indices)


@dataclass
class RankedList:
    """Top-N item indices with their scores, best first. Ties are broken
    by ascending item index, so rankings are deterministic."""

    items: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return len(self.items)


def build_inference_vector(
    session_prefix: Sequence[int | None], delta_inf: float
) -> InferenceVector:
    """Decay-weight a session prefix. Unmapped items (None) are skipped;
    positions are counted over the mapped items, the most recent of which
    gets weight exp(0)=1. Repeated items keep their most recent weight."""
    if len(session_prefix) == 0:
        raise DataError("session prefix is empty")
    mapped = [i for i in session_prefix if i is not None]
    if not mapped:
        raise DataError("session prefix has no items in the training vocabulary")
    L = len(mapped)
    weights: dict[int, float] = {}
    for pos, item in enumerate(mapped, start=1):
        weights[item] = math.exp(-(L - pos) / delta_inf)  # later occurrence wins
    indices = np.fromiter(weights.keys(), dtype=np.int64, count=len(weights))
    values = np.fromiter(weights.values(), dtype=np.float64, count=len(weights))
    return InferenceVector(indices, values)


def score_vector(x: InferenceVector, model: ItemItemModel) -> np.ndarray:
    """x . B over all n items, touching only the rows x references."""
    return x.weights @ model.matrix[x.indices, :]


def predict_topn(
    x: InferenceVector, model: ItemItemModel, N: int, exclude_seen: bool = False
) -> RankedList:
    """Rank all items by x . B and return the top N."""
    n = model.n
    if np.any(x.indices >= n):
        raise DataError("inference vector references items outside the model vocabulary")
    if N > n:
        warnings.warn(f"top-N {N} exceeds item count {n}; truncating", stacklevel=2)
        N = n
    if N < 0:
        raise DataError(f"top-N must be nonnegative, got {N}")
    scores = score_vector(x, model)
    if exclude_seen:
        scores = scores.copy()
        scores[x.indices] = -np.inf
    order = np.lexsort((np.arange(n), -scores))[:N]
    return RankedList(order, scores[order])


def count_inference_flops(x: InferenceVector, n: int) -> int:
    """Multiply-and-add cost of the scoring product: 2 * nnz(x) * n."""
    return 2 * x.nnz * n
