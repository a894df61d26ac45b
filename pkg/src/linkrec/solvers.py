"""Closed-form solvers for the linear item-item model family.

Four model kinds share one algebraic backbone:

* ``S``    -- ridge-regularized session self-reconstruction with the
  diagonal capped at ``xi``, solved via the Gram inverse and a per-column
  multiplier vector that enforces the cap exactly.
* ``LIS``  -- the same solve on sessions extended by the trained ``S``
  model (self-distillation through ``beta``).
* ``NIT``  -- transition ridge from normalized past rows to normalized
  future rows, with the plain L2 penalty replaced by a pull toward a
  row-stochastic teacher matrix.
* ``LINK`` -- the similarity and transition objectives blended by
  ``alpha`` and solved jointly against the same teacher pull.

All solves are dense n-by-n in float64; Gram matrices are accumulated
from sparse rows so only n-by-n objects are ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .data import ItemVocab
from .errors import ConfigError, DataError, NumericalError

MODEL_KINDS = ("S", "LIS", "NIT", "LINK")

DIAG_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by the solver family.

    lam   -- ridge weight; for NIT/LINK it scales the teacher pull.
    xi    -- diagonal cap in [0, 1) applied by the similarity solves.
    alpha -- similarity/transition balance in [0, 1] for LINK.
    beta  -- original/extended session mix in [0, 1] for LIS.
    tau   -- teacher softmax temperature (> 0).
    """

    lam: float = 1.0
    xi: float = 0.0
    alpha: float = 0.5
    beta: float = 0.5
    tau: float = 1.0

    def validate(self) -> None:
        if not self.lam > 0:
            raise ConfigError(f"lam must be > 0, got {self.lam}")
        if not 0.0 <= self.xi < 1.0:
            raise ConfigError(f"xi must lie in [0, 1), got {self.xi}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")


@dataclass
class ItemItemModel:
    """Learned n-by-n item-item matrix; rows index source items, columns
    scored items."""

    matrix: np.ndarray
    kind: str
    config: SolverConfig
    vocab: ItemVocab | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SolverInternals:
    """Intermediates of a constrained similarity solve, kept for
    optimality checks: Gram matrix, its ridge inverse P, the per-column
    scaling gamma, and the cap multipliers mu = gamma - lam."""

    gram: np.ndarray
    P: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray


def _as_gram(mat) -> np.ndarray:
    """M^T M as dense float64; sparse inputs are accumulated sparsely."""
    if sp.issparse(mat):
        return np.asarray((mat.T @ mat).toarray(), dtype=np.float64)
    arr = np.asarray(mat, dtype=np.float64)
    return arr.T @ arr


def _as_cross(a, b) -> np.ndarray:
    """A^T B as dense float64 for any sparse/dense combination."""
    out = a.T @ b
    if sp.issparse(out):
        out = out.toarray()
    return np.asarray(out, dtype=np.float64)


def _spd_solve(A: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    """Solve A X = rhs with A symmetric positive definite."""
    try:
        factor = sla.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        diag = np.diag(A)
        raise NumericalError(
            f"{context}: SPD factorization failed for n={A.shape[0]} system "
            f"(diag range [{diag.min():.6g}, {diag.max():.6g}], "
            f"condition estimate {np.linalg.cond(A):.3e})"
        ) from exc
    return sla.cho_solve(factor, rhs)


def _teacher_array(teacher, n: int) -> np.ndarray:
    matrix = getattr(teacher, "matrix", teacher)
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.shape != (n, n):
        raise DataError(f"teacher matrix shape {arr.shape} does not match n={n}")
    return arr


def _constrained_solve(
    gram: np.ndarray, lam: float, xi: float, kind: str, vocab: ItemVocab | None
) -> tuple[ItemItemModel, SolverInternals]:
    n = gram.shape[0]
    P = _spd_solve(gram + lam * np.eye(n), np.eye(n), f"{kind} solve")
    p_diag = np.diag(P)
    # Cap check: columns whose unconstrained diagonal 1 - lam*P_jj already
    # respects xi keep gamma = lam; the rest get pinned to the cap.
    gamma = np.where(1.0 - lam * p_diag <= xi, lam, (1.0 - xi) / p_diag)
    B = np.eye(n) - P * gamma[np.newaxis, :]
    diag = np.diag(B)
    if np.any(diag > xi + DIAG_TOL):
        raise NumericalError(
            f"{kind} solve: diagonal cap violated by {float(np.max(diag) - xi):.3e}"
        )
    model = ItemItemModel(B, kind, SolverConfig(lam=lam, xi=xi), vocab)
    internals = SolverInternals(gram=gram, P=P, gamma=gamma, mu=gamma - lam)
    return model, internals


def solve_constrained_similarity(
    X, lam: float, xi: float, vocab: ItemVocab | None = None, return_internals: bool = False
):
    """Fit the diagonal-capped similarity model on a binary session matrix.

    Returns the model, or ``(model, internals)`` with
    ``return_internals``.
    """
    SolverConfig(lam=lam, xi=xi).validate()
    model, internals = _constrained_solve(_as_gram(X), lam, xi, "S", vocab)
    return (model, internals) if return_internals else model


def solve_lis(
    X_prime, lam: float, xi: float, vocab: ItemVocab | None = None, return_internals: bool = False
):
    """Fit the similarity model on an extended session matrix. With
    beta=0 the extension is the identity, so this reproduces the plain
    similarity solve bit for bit."""
    SolverConfig(lam=lam, xi=xi).validate()
    model, internals = _constrained_solve(_as_gram(X_prime), lam, xi, "LIS", vocab)
    return (model, internals) if return_internals else model


def extend_sessions(X, similarity: ItemItemModel, beta: float):
    """Mix each session row with its model reconstruction:
    beta * X B + (1 - beta) * X.

    beta=0 returns X unchanged (same object), keeping downstream solves
    on the identical code path as the unextended model.
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    B = similarity.matrix
    if X.shape[1] != B.shape[0]:
        raise DataError(
            f"session matrix has {X.shape[1]} item columns but the model has {B.shape[0]}"
        )
    if beta == 0.0:
        return X
    reconstructed = np.asarray(X @ B, dtype=np.float64)
    original = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=np.float64)
    return beta * reconstructed + (1.0 - beta) * original


def solve_nit(Y_norm, Z_norm, teacher, lam: float, vocab: ItemVocab | None = None) -> ItemItemModel:
    """Fit the teacher-regularized transition model from normalized past
    rows to normalized future rows."""
    if not lam > 0:
        raise ConfigError(f"lam must be > 0, got {lam}")
    if Y_norm.shape != Z_norm.shape:
        raise DataError(f"past/future shapes differ: {Y_norm.shape} vs {Z_norm.shape}")
    n = Y_norm.shape[1]
    T = _teacher_array(teacher, n)
    gram = _as_gram(Y_norm)
    cross = _as_cross(Y_norm, Z_norm)
    B = _spd_solve(gram + lam * np.eye(n), cross + lam * T, "NIT solve")
    return ItemItemModel(B, "NIT", SolverConfig(lam=lam), vocab)


def solve_link(
    X_prime_norm,
    Y_norm,
    Z_norm,
    teacher,
    alpha: float,
    lam: float,
    vocab: ItemVocab | None = None,
) -> ItemItemModel:
    """Fit the merged model: alpha weights the (normalized) extended
    similarity objective, 1-alpha the transition objective, and lam pulls
    toward the teacher.

    The stacked design matrix is never materialized; its Gram and cross
    terms are accumulated as alpha/1-alpha blends of the component terms.
    At alpha=0 this is exactly the transition solve, bit for bit.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    if not lam > 0:
        raise ConfigError(f"lam must be > 0, got {lam}")
    if Y_norm.shape != Z_norm.shape:
        raise DataError(f"past/future shapes differ: {Y_norm.shape} vs {Z_norm.shape}")
    n = Y_norm.shape[1]
    if X_prime_norm.shape[1] != n:
        raise DataError(
            f"extended sessions have {X_prime_norm.shape[1]} item columns, expected {n}"
        )
    T = _teacher_array(teacher, n)
    if alpha == 0.0:
        gram = _as_gram(Y_norm)
        cross = _as_cross(Y_norm, Z_norm)
    elif alpha == 1.0:
        gram = _as_gram(X_prime_norm)
        cross = gram
    else:
        gram_sim = _as_gram(X_prime_norm)
        gram = alpha * gram_sim + (1.0 - alpha) * _as_gram(Y_norm)
        cross = alpha * gram_sim + (1.0 - alpha) * _as_cross(Y_norm, Z_norm)
    B = _spd_solve(gram + lam * np.eye(n), cross + lam * T, "LINK solve")
    return ItemItemModel(B, "LINK", SolverConfig(lam=lam, alpha=alpha), vocab)
