"""Generalized rank pooling: subspaces that approximate a sequence in low rank
while ordering the projection energies ``||U^T x_t||^2`` in time.

The cost minimized over the Grassmannian is::

    F(U) = 1/2 sum_i (||x_i||^2 - ||U^T x_i||^2)
         + w * sum_{i<j} max(0, ||U^T x_i||^2 - ||U^T x_j||^2 + eta)

with ``w = lam / 2``. In slack mode the per-pair slack is minimized out in
closed form, which caps the hinge weight at ``w = min(lam / 2, slack_c)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import pca_subspace
from .errors import DegenerateSequence, RankDeficient, ShapeMismatch
from .grassmann import CgOptions, OptTrace, Termination, cg_minimize, orthonormalize
from .sequence import as_frames, as_sequence


@dataclass(frozen=True)
class GrpParams:
    """Pooling parameters.

    ``init`` is ``"pca"`` or ``"random"``; ``seed`` drives the random start
    and the fallback used when the PCA start is rank deficient. With
    ``normalize=False`` the pooling functions use the rows as given instead
    of unit-normalizing them.
    """

    p: int = 2
    eta: float = 0.1
    lam: float = 10.0
    use_slack: bool = False
    slack_c: float = 1.0
    cg: CgOptions = field(default_factory=CgOptions)
    init: str = "pca"
    seed: int = 0
    normalize: bool = True

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"rank p must be >= 1, got {self.p}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if self.use_slack and not self.slack_c > 0:
            raise ValueError(f"slack_c must be > 0, got {self.slack_c}")
        if self.init not in ("pca", "random"):
            raise ValueError(f"init must be 'pca' or 'random', got {self.init!r}")

    @property
    def hinge_weight(self) -> float:
        if self.use_slack:
            return min(0.5 * self.lam, self.slack_c)
        return 0.5 * self.lam


@dataclass
class SubspaceDescriptor:
    """A pooled sequence: the subspace plus how it was obtained.

    ``constraints_satisfied_fraction`` counts pairs ``i < j`` whose order is
    respected (``||U^T x_i||^2 < ||U^T x_j||^2``);
    ``margin_satisfied_fraction`` additionally requires the gap to reach
    ``eta``.
    """

    point: np.ndarray
    params_used: Optional[GrpParams]
    final_objective: float
    constraints_satisfied_fraction: float
    margin_satisfied_fraction: float = float("nan")
    iterations_run: int = 0
    termination: Termination = Termination.MAX_ITERS
    trace: Optional[OptTrace] = field(default=None, repr=False)
    warnings: list = field(default_factory=list)

    @property
    def trace_summary(self):
        return self.iterations_run, self.termination


@dataclass(frozen=True)
class ViolationMatrix:
    """Strictly upper-triangular 0/1 matrix of pairs violating the margin."""

    entries: np.ndarray

    @property
    def nu(self) -> np.ndarray:
        """Row sums minus column sums: net count of pairs where frame ``i``
        is the earlier (``+1``) or later (``-1``) member."""
        return self.entries.sum(axis=1) - self.entries.sum(axis=0)

    @property
    def count(self) -> int:
        return int(self.entries.sum())


def _check(U, X, p=None):
    X = as_frames(X)
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != X.shape[1]:
        raise ShapeMismatch(f"U has shape {U.shape}, features have dimension {X.shape[1]}")
    if p is not None and U.shape[1] != p:
        raise ShapeMismatch(f"U has {U.shape[1]} columns, params.p = {p}")
    return U, X


def projection_energies(U, X) -> np.ndarray:
    """``||U^T x_t||^2`` for every frame."""
    U, X = _check(U, X)
    XU = X @ U
    return np.einsum("ij,ij->i", XU, XU)


def _margins(e, eta):
    # m[i, j] = e_i - e_j + eta; positive means the pair (i, j) is violated
    return e[:, None] - e[None, :] + eta


def violation_matrix(U, X, eta: float, slack=None) -> ViolationMatrix:
    """Pairs ``i < j`` with ``||U^T x_j||^2 - ||U^T x_i||^2 < eta - xi_ij``.

    A pair sitting exactly on the margin is not counted, matching the
    zero subgradient used at the hinge kink.
    """
    e = projection_energies(U, X)
    m = _margins(e, eta)
    if slack is not None:
        slack = np.asarray(slack, dtype=float)
        if slack.shape != m.shape:
            raise ShapeMismatch(f"slack has shape {slack.shape}, expected {m.shape}")
        m = m - slack
    return ViolationMatrix(np.triu(m > 0.0, 1).astype(np.int64))


def grp_objective(U, X, params: GrpParams) -> float:
    U, X = _check(U, X, params.p)
    XU = X @ U
    e = np.einsum("ij,ij->i", XU, XU)
    recon = 0.5 * float(np.sum(np.einsum("ij,ij->i", X, X) - e))
    m = np.triu(np.maximum(_margins(e, params.eta), 0.0), 1)
    return recon + params.hinge_weight * float(m.sum())


def grp_gradient_naive(U, X, params: GrpParams) -> np.ndarray:
    """Euclidean gradient assembled from explicit ``d x d`` scatter matrices.

    Loops over every violated pair; meant as a reference for
    :func:`grp_gradient_fast`.
    """
    U, X = _check(U, X, params.p)
    n, d = X.shape
    V = violation_matrix(U, X, params.eta).entries
    S = np.zeros((d, d))
    for i, j in zip(*np.nonzero(V)):
        S += np.outer(X[i], X[i]) - np.outer(X[j], X[j])
    scatter = np.zeros((d, d))
    for i in range(n):
        scatter += np.outer(X[i], X[i])
    return (2.0 * params.hinge_weight * S - scatter) @ U


def grp_gradient_fast(U, X, params: GrpParams) -> np.ndarray:
    """Same gradient as :func:`grp_gradient_naive` without any ``d x d`` product.

    Costs ``O(ndp + n^2)``: the violation counts weight the rows of ``X U``.
    """
    U, X = _check(U, X, params.p)
    XU = X @ U
    e = np.einsum("ij,ij->i", XU, XU)
    V = np.triu(_margins(e, params.eta) > 0.0, 1)
    nu = V.sum(axis=1) - V.sum(axis=0)
    w = 2.0 * params.hinge_weight * nu - 1.0
    return X.T @ (w[:, None] * XU)


def order_fractions(U, X, eta: float):
    """Fractions of pairs ``i < j`` with order respected, and with margin ``eta`` met."""
    e = projection_energies(U, X)
    n = e.size
    iu = np.triu_indices(n, 1)
    gap = e[iu[1]] - e[iu[0]]
    if gap.size == 0:
        return 1.0, 1.0
    return float(np.mean(gap > 0.0)), float(np.mean(gap >= eta))


def reconstruction_identity_check(U, x):
    """Residual energy of ``x`` by two routes: ``||x - U U^T x||^2`` and
    ``trace(x x^T (I - U U^T))`` with the full projector."""
    U = np.asarray(U, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or U.ndim != 2 or U.shape[0] != x.size:
        raise ShapeMismatch(f"x has shape {x.shape}, U has shape {U.shape}")
    r = x - U @ (U.T @ x)
    lhs = float(r @ r)
    P = np.eye(x.size) - U @ U.T
    rhs = float(np.trace(np.outer(x, x) @ P))
    return lhs, rhs


def _prepare(X, params):
    seq = as_sequence(X)
    if params.normalize:
        seq = seq.normalize()
    if seq.n < 2:
        raise DegenerateSequence(f"pooling needs at least 2 frames, got {seq.n}")
    if params.p > seq.d:
        raise ValueError(f"rank p = {params.p} exceeds feature dimension d = {seq.d}")
    return seq


def _initial_point(X, p, params, notes, complement=None):
    """PCA start (falling back to a seeded random start), optionally kept
    orthogonal to the columns of ``complement``."""
    if params.init == "pca":
        try:
            return pca_subspace(X, p)
        except RankDeficient:
            msg = f"PCA start rank deficient for p = {p}; using random start (seed {params.seed})"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
    M = np.random.default_rng(params.seed).standard_normal((X.shape[1], p))
    if complement is not None:
        M = M - complement @ (complement.T @ M)
    return orthonormalize(M)


def _describe(U, X, params, trace, notes):
    frac, margin_frac = order_fractions(U, X, params.eta)
    return SubspaceDescriptor(
        point=U,
        params_used=params,
        final_objective=grp_objective(U, X, params),
        constraints_satisfied_fraction=frac,
        margin_satisfied_fraction=margin_frac,
        iterations_run=trace.iterations_run,
        termination=trace.termination,
        trace=trace,
        warnings=notes,
    )


def pool_grp(X, params: Optional[GrpParams] = None) -> SubspaceDescriptor:
    """Pool a sequence into a ``d x p`` subspace by Grassmann CG.

    Rows are unit-normalized first unless the sequence is already flagged
    as normalized or ``params.normalize`` is off.
    """
    params = params or GrpParams()
    seq = _prepare(X, params)
    F = seq.frames
    notes = []
    U0 = _initial_point(F, params.p, params, notes)
    U, trace = cg_minimize(
        lambda U: grp_objective(U, F, params),
        lambda U: grp_gradient_fast(U, F, params),
        U0,
        params.cg,
    )
    return _describe(U, F, params, trace, notes)


def pool_grp_incremental(X, params: Optional[GrpParams] = None) -> SubspaceDescriptor:
    """Greedy variant: one direction at a time on deflated features.

    Direction ``q`` solves the rank-1 problem on ``x_i - U_{q-1} U_{q-1}^T x_i``;
    its gradient is projected off ``span(U_{q-1})`` so iterates stay in the
    orthogonal complement. The stacked columns get a final orthonormalization.
    """
    params = params or GrpParams()
    seq = _prepare(X, params)
    F = seq.frames
    sub = replace(params, p=1)
    notes = []
    cols = []
    iterations = 0
    last_trace = None
    for q in range(params.p):
        if cols:
            B = np.hstack(cols)
            Fq = F - (F @ B) @ B.T

            def egrad(u, Fq=Fq, B=B):
                g = grp_gradient_fast(u, Fq, sub)
                return g - B @ (B.T @ g)
        else:
            B = None
            Fq = F

            def egrad(u, Fq=Fq):
                return grp_gradient_fast(u, Fq, sub)

        u0 = _initial_point(Fq, 1, sub, notes, complement=B)
        u, last_trace = cg_minimize(lambda u, Fq=Fq: grp_objective(u, Fq, sub), egrad, u0, sub.cg)
        if B is not None:
            u = u - B @ (B.T @ u)
        cols.append(u / np.linalg.norm(u))
        iterations += last_trace.iterations_run

    U = np.hstack(cols)
    if params.p > 1:
        U = orthonormalize(U)
    trace = OptTrace(
        objective_values=list(last_trace.objective_values),
        grad_norms=list(last_trace.grad_norms),
        iterations_run=iterations,
        termination=last_trace.termination,
    )
    return _describe(U, F, params, trace, notes)
