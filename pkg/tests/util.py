"""Shared toy-data builders and independent oracles for the test suite.

Oracles here deliberately avoid the library's solve paths: plain
np.linalg.inv / np.linalg.solve, explicit matrix stacking, and projected
gradient descent, so agreement is a two-route check.
"""

from __future__ import annotations

import numpy as np

from linkrec.data import ItemVocab, SessionDataset


def make_dataset(token_sessions, tag="train", vocab=None) -> SessionDataset:
    """Dataset from token sessions; vocabulary in first-occurrence order."""
    if vocab is None:
        order = []
        seen = set()
        for s in token_sessions:
            for tok in s:
                if tok not in seen:
                    seen.add(tok)
                    order.append(tok)
        vocab = ItemVocab(order)
    sessions = [[vocab.token_to_index[tok] for tok in s] for s in token_sessions]
    return SessionDataset(sessions, tag, vocab)


def ridge_similarity_oracle(X: np.ndarray, lam: float, xi: float) -> np.ndarray:
    """Direct-inverse evaluation of the capped similarity closed form."""
    n = X.shape[1]
    P = np.linalg.inv(X.T @ X + lam * np.eye(n))
    p_diag = np.diag(P)
    gamma = np.where(1.0 - lam * p_diag <= xi, lam, (1.0 - xi) / p_diag)
    return np.eye(n) - P * gamma[np.newaxis, :]


def projected_gradient_oracle(
    X: np.ndarray, lam: float, xi: float, max_iter: int = 200_000, tol: float = 1e-13
) -> np.ndarray:
    """Minimize ||X - XB||_F^2 + lam ||B||_F^2 s.t. diag(B) <= xi by
    projected gradient descent with exact diagonal clipping."""
    n = X.shape[1]
    G = X.T @ X
    L = 2.0 * (np.linalg.eigvalsh(G)[-1] + lam)
    step = 1.0 / L
    B = np.zeros((n, n))
    for _ in range(max_iter):
        grad = 2.0 * (G @ B - G) + 2.0 * lam * B
        B_next = B - step * grad
        d = np.diag(B_next)
        np.fill_diagonal(B_next, np.minimum(d, xi))
        if np.max(np.abs(B_next - B)) < tol:
            return B_next
        B = B_next
    return B


def link_normal_equations_oracle(Xp, Y, Z, T, alpha, lam) -> np.ndarray:
    """Assemble the merged objective by explicitly stacking the weighted
    design/target matrices, then LU-solve the normal equations."""
    Xp = np.asarray(Xp, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    design = np.vstack([np.sqrt(alpha) * Xp, np.sqrt(1.0 - alpha) * Y])
    targets = np.vstack([np.sqrt(alpha) * Xp, np.sqrt(1.0 - alpha) * Z])
    n = Xp.shape[1]
    A = design.T @ design + lam * np.eye(n)
    rhs = design.T @ targets + lam * np.asarray(T, dtype=float)
    return np.linalg.solve(A, rhs)


def similarity_objective(X, B, lam) -> float:
    X = np.asarray(X, dtype=float)
    return float(np.linalg.norm(X - X @ B, "fro") ** 2 + lam * np.linalg.norm(B, "fro") ** 2)


def transition_objective(Y, Z, B, T, lam) -> float:
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    return float(
        np.linalg.norm(Z - Y @ B, "fro") ** 2 + lam * np.linalg.norm(np.asarray(T) - B, "fro") ** 2
    )


def merged_objective(Xp, Y, Z, B, T, alpha, lam) -> float:
    Xp = np.asarray(Xp, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    return float(
        alpha * np.linalg.norm(Xp - Xp @ B, "fro") ** 2
        + (1.0 - alpha) * np.linalg.norm(Z - Y @ B, "fro") ** 2
        + lam * np.linalg.norm(np.asarray(T) - B, "fro") ** 2
    )


def random_binary_sessions(rng, m, n, density=0.3):
    """Random binary session matrix with no empty rows."""
    X = (rng.random((m, n)) < density).astype(float)
    for r in range(m):
        if X[r].sum() == 0:
            X[r, rng.integers(n)] = 1.0
    return X
