"""Past/future partial-session matrices with exponential position decay,
plus row normalization into probability rows.

Each session of length L contributes L-1 (past, future) row pairs, one
per split point. Within a partial session the item closest to the split
anchor (last past item / first future item) carries weight 1 and weights
fall off as exp(-distance / delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError


@dataclass(frozen=True)
class DecayParams:
    """Position-decay scales for training pairs and for inference."""

    delta_pos: float = 1.0
    delta_inf: float = 1.0

    def validate(self) -> None:
        for name, v in (("delta_pos", self.delta_pos), ("delta_inf", self.delta_inf)):
            if not (v > 0 and math.isfinite(v)):
                raise DataError(f"{name} must be a positive finite real, got {v}")


@dataclass
class PartialMatrices:
    """Aligned past/future matrices; row r of both comes from the same
    split point of the same session."""

    past: sp.csr_matrix
    future: sp.csr_matrix
    pair_count: int


def _partial_weights(items: list[int], distances: list[int], delta: float) -> dict[int, float]:
    """Decay weights per distinct item; repeats keep the occurrence
    closest to the anchor (maximum weight)."""
    weights: dict[int, float] = {}
    for item, d in zip(items, distances):
        w = math.exp(-d / delta)
        if w > weights.get(item, 0.0):
            weights[item] = w
    return weights


def build_partial_matrices(dataset, delta_pos: float) -> PartialMatrices:
    """Build the stacked past/future matrices for every split point of
    every session. Sessions must have length >= 2."""
    DecayParams(delta_pos=delta_pos).validate()
    n = len(dataset.vocab)
    rows_p, cols_p, vals_p = [], [], []
    rows_f, cols_f, vals_f = [], [], []
    r = 0
    for s_idx, session in enumerate(dataset.sessions):
        L = len(session)
        if L < 2:
            raise DataError(f"session {s_idx} has length {L}; need >= 2 to form pairs")
        for split in range(1, L):  # past = session[:split], future = session[split:]
            past = session[:split]
            future = session[split:]
            # distance to the last past item / to the first future item
            pw = _partial_weights(past, [split - 1 - p for p in range(split)], delta_pos)
            fw = _partial_weights(future, list(range(L - split)), delta_pos)
            for c, w in pw.items():
                rows_p.append(r)
                cols_p.append(c)
                vals_p.append(w)
            for c, w in fw.items():
                rows_f.append(r)
                cols_f.append(c)
                vals_f.append(w)
            r += 1
    past_mat = sp.csr_matrix(
        (np.asarray(vals_p), (np.asarray(rows_p), np.asarray(cols_p))), shape=(r, n)
    )
    future_mat = sp.csr_matrix(
        (np.asarray(vals_f), (np.asarray(rows_f), np.asarray(cols_f))), shape=(r, n)
    )
    return PartialMatrices(past=past_mat, future=future_mat, pair_count=r)


def row_normalize(matrix, allow_zero_rows: bool = False):
    """Scale each row to sum to 1. Zero rows raise unless
    ``allow_zero_rows``, in which case they pass through unchanged."""
    if sp.issparse(matrix):
        m = matrix.tocsr(copy=True)
        sums = np.asarray(m.sum(axis=1)).ravel()
        zero = sums == 0.0
        if zero.any() and not allow_zero_rows:
            raise DataError(f"row {int(np.argmax(zero))} sums to zero; cannot normalize")
        scale = np.where(zero, 1.0, sums)
        m.data /= np.repeat(scale, np.diff(m.indptr))
        return m
    dense = np.asarray(matrix, dtype=np.float64)
    sums = dense.sum(axis=1)
    zero = sums == 0.0
    if zero.any() and not allow_zero_rows:
        raise DataError(f"row {int(np.argmax(zero))} sums to zero; cannot normalize")
    scale = np.where(zero, 1.0, sums)
    return dense / scale[:, None]
