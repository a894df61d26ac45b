"""End-to-end training paths wiring the data, partial-session, teacher,
and solver stages together for each model kind."""

from __future__ import annotations

import numpy as np

from .data import SessionDataset, build_session_matrix
from .errors import ConfigError
from .partial import build_partial_matrices, row_normalize
from .solvers import (
    ItemItemModel,
    SolverConfig,
    extend_sessions,
    solve_constrained_similarity,
    solve_link,
    solve_lis,
    solve_nit,
)
from .teacher import TeacherMatrix

KINDS_NEEDING_TEACHER = ("NIT", "LINK")


def fit_model(
    train: SessionDataset,
    kind: str,
    cfg: SolverConfig,
    delta_pos: float,
    teacher: TeacherMatrix | np.ndarray | None = None,
) -> tuple[ItemItemModel, int]:
    """Train one model of the requested kind; returns (model, pair_count)
    where pair_count is the number of partial-session rows used (0 for
    the pure similarity kinds)."""
    cfg.validate()
    vocab = train.vocab
    if kind in KINDS_NEEDING_TEACHER and teacher is None:
        raise ConfigError(f"model kind {kind} requires a teacher matrix")

    if kind == "S":
        X = build_session_matrix(train)
        return solve_constrained_similarity(X, cfg.lam, cfg.xi, vocab), 0
    if kind == "LIS":
        X = build_session_matrix(train)
        base = solve_constrained_similarity(X, cfg.lam, cfg.xi, vocab)
        X_prime = extend_sessions(X, base, cfg.beta)
        return solve_lis(X_prime, cfg.lam, cfg.xi, vocab), 0

    pairs = build_partial_matrices(train, delta_pos)
    Y = row_normalize(pairs.past)
    Z = row_normalize(pairs.future)
    if kind == "NIT":
        return solve_nit(Y, Z, teacher, cfg.lam, vocab), pairs.pair_count
    if kind == "LINK":
        X = build_session_matrix(train)
        base = solve_constrained_similarity(X, cfg.lam, cfg.xi, vocab)
        X_prime = extend_sessions(X, base, cfg.beta)
        X_prime_norm = row_normalize(X_prime)
        model = solve_link(X_prime_norm, Y, Z, teacher, cfg.alpha, cfg.lam, vocab)
        return model, pairs.pair_count
    raise ConfigError(f"unknown model kind {kind!r}")
