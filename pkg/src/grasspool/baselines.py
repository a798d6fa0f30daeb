"""Reference poolers: average, max, line rank pooling, and the PCA subspace."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSequence, EmptySequence, RankDeficient
from .sequence import as_frames


class PoolMethod(enum.Enum):
    AVERAGE = "average"
    MAX = "max"
    RANK_POOL_LINE = "rank_pool_line"


@dataclass(frozen=True)
class VectorDescriptor:
    vector: np.ndarray
    method: PoolMethod


def _nonempty(X):
    X = as_frames(X)
    if X.shape[0] < 1:
        raise EmptySequence("cannot pool an empty sequence")
    return X


def pool_average(X) -> VectorDescriptor:
    return VectorDescriptor(_nonempty(X).mean(axis=0), PoolMethod.AVERAGE)


def pool_max(X) -> VectorDescriptor:
    return VectorDescriptor(_nonempty(X).max(axis=0), PoolMethod.MAX)


def rank_pool_objective(z, X, lam: float = 1.0) -> float:
    """``0.5 ||z||^2 + lam * sum_{i<j} max(0, 1 - (z.x_j - z.x_i))``."""
    s = as_frames(X) @ np.asarray(z, dtype=float)
    hinge = np.maximum(0.0, 1.0 + s[:, None] - s[None, :])
    return 0.5 * float(z @ z) + lam * float(np.triu(hinge, 1).sum())


def rank_pool_line(X, lam: float = 1.0, iters: int = 1000) -> VectorDescriptor:
    """Line rank pooling: a direction ``z`` whose scores increase with time.

    Minimizes ``0.5 ||z||^2 + lam * sum_{i<j} max(0, z.x_i - z.x_j + 1)``
    by subgradient descent with step ``1 / (k + 1)`` (the objective is
    1-strongly convex). The best iterate seen is returned.
    """
    X = as_frames(X)
    n = X.shape[0]
    if n < 2:
        raise DegenerateSequence(f"rank pooling needs at least 2 frames, got {n}")
    iu = np.triu_indices(n, 1)
    # pair weights sum to zero, so shifting by one frame changes nothing
    # and makes constant sequences give an exactly zero subgradient
    Xc = X - X[0]
    z = np.zeros(X.shape[1])
    best_z, best_f = z.copy(), rank_pool_objective(z, X, lam)
    for k in range(iters):
        s = X @ z
        active = np.zeros((n, n), dtype=bool)
        active[iu] = (1.0 + s[iu[0]] - s[iu[1]]) > 0.0
        # each active pair (i, j) contributes x_i - x_j
        weight = active.sum(axis=1) - active.sum(axis=0)
        z = z - (z + lam * (weight @ Xc)) / (k + 1.0)
        f = rank_pool_objective(z, X, lam)
        if f < best_f:
            best_z, best_f = z.copy(), f
    return VectorDescriptor(best_z, PoolMethod.RANK_POOL_LINE)


def _sign_fix(U):
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def pca_subspace(X, p: int) -> np.ndarray:
    """Top-``p`` eigenvectors of the (uncentered) scatter ``sum_i x_i x_i^T``.

    Uses the ``n x n`` Gram matrix when ``d > n``. Each column is signed so
    its largest-magnitude entry is positive.

    Raises
    ------
    RankDeficient
        If the scatter has fewer than ``p`` numerically nonzero eigenvalues.
    """
    X = as_frames(X)
    n, d = X.shape
    if not 1 <= p <= d:
        raise ValueError(f"need 1 <= p <= d = {d}, got p = {p}")
    if d > n:
        w, V = np.linalg.eigh(X @ X.T)
    else:
        w, V = np.linalg.eigh(X.T @ X)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    floor = max(n, d) * np.finfo(float).eps * max(w[0], 0.0)
    if p > w.size or w[p - 1] <= floor:
        raise RankDeficient(f"scatter matrix has rank < {p}")
    if d > n:
        U = X.T @ (V[:, :p] / np.sqrt(w[:p]))
        # one Gram-Schmidt pass restores orthonormality lost to cond(X)
        U, _ = np.linalg.qr(U)
    else:
        U = V[:, :p]
    return _sign_fix(U)
