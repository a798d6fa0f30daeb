"""Grassmann manifold primitives and a Riemannian conjugate-gradient solver.

Points are ``d x p`` arrays with orthonormal columns; any such array stands
for the subspace it spans. Tangent vectors are ``d x p`` arrays ``D`` with
``U.T @ D == 0`` (the horizontal space at ``U``). Both are plain numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CallbackFailure, RankDeficient, ShapeMismatch

#: relative floor on |diag(R)| below which a QR factor counts as rank deficient
RANK_RTOL = 1e-12
#: backtracking shrinks attempted before the line search gives up
MAX_SHRINKS = 50


class BetaRule(enum.Enum):
    POLAK_RIBIERE_PLUS = "pr+"
    FLETCHER_REEVES = "fr"


class Termination(enum.Enum):
    GRAD_TOL = "grad_tol"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_FAIL = "line_search_fail"


@dataclass(frozen=True)
class CgOptions:
    """Controls for :func:`cg_minimize`.

    ``restart_every=None`` means ``p * d`` for the problem being solved.
    """

    max_iters: int = 100
    grad_tol: float = 1e-6
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    initial_step: float = 1.0
    beta_rule: BetaRule = BetaRule.POLAK_RIBIERE_PLUS
    restart_every: Optional[int] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not 0.0 < self.armijo_shrink < 1.0:
            raise ValueError(f"armijo_shrink must lie in (0, 1), got {self.armijo_shrink}")
        if not self.grad_tol > 0.0:
            raise ValueError(f"grad_tol must be > 0, got {self.grad_tol}")
        if not self.initial_step > 0.0:
            raise ValueError(f"initial_step must be > 0, got {self.initial_step}")
        if self.restart_every is not None and self.restart_every < 1:
            raise ValueError(f"restart_every must be >= 1, got {self.restart_every}")


@dataclass
class OptTrace:
    """Record of a :func:`cg_minimize` run.

    ``objective_values[0]`` and ``grad_norms[0]`` belong to the starting
    point; every later entry belongs to an accepted iterate.
    """

    objective_values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    iterations_run: int = 0
    termination: Termination = Termination.MAX_ITERS

    def is_monotone(self, rtol: float = 1e-12) -> bool:
        v = np.asarray(self.objective_values)
        if v.size < 2:
            return True
        return bool(np.all(v[1:] - v[:-1] <= rtol * np.maximum(np.abs(v[:-1]), 1.0)))


def _check_pair(U, G, what="G"):
    U = np.asarray(U, dtype=float)
    G = np.asarray(G, dtype=float)
    if U.ndim != 2 or G.shape != U.shape:
        raise ShapeMismatch(f"{what} has shape {G.shape}, expected {U.shape}")
    return U, G


def orthonormalize(M) -> np.ndarray:
    """Canonical orthonormal basis of ``span(M)`` via thin QR.

    Columns are signed so the diagonal of ``R`` is positive, which makes the
    result a deterministic function of ``M``.

    Raises
    ------
    RankDeficient
        If the smallest ``|R_ii|`` is below ``1e-12`` times the largest.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] < 1 or M.shape[1] > M.shape[0]:
        raise ShapeMismatch(f"need a d x p matrix with d >= p >= 1, got shape {M.shape}")
    Q, R = np.linalg.qr(M)
    r = np.diag(R)
    mag = np.abs(r)
    if not np.all(np.isfinite(mag)) or mag.min() < RANK_RTOL * mag.max() or mag.max() == 0.0:
        raise RankDeficient(f"numerical rank below {M.shape[1]} (|R_ii| range {mag.min():.3g}..{mag.max():.3g})")
    return Q * np.where(r < 0, -1.0, 1.0)


def project_tangent(U, G) -> np.ndarray:
    """Horizontal projection ``(I - U U^T) G``, the Riemannian gradient map."""
    U, G = _check_pair(U, G)
    return G - U @ (U.T @ G)


def retract(U, D, step: float = 1.0) -> np.ndarray:
    """QR retraction ``orthonormalize(U + step * D)``.

    A zero step or zero direction returns ``U`` itself (copied).
    """
    U, D = _check_pair(U, D, "D")
    if step == 0.0 or not np.any(D):
        return U.copy()
    return orthonormalize(U + step * D)


def transport(U_from, U_to, D) -> np.ndarray:
    """Move tangent vector ``D`` at ``U_from`` to the tangent space at ``U_to``."""
    U_from, D = _check_pair(U_from, D, "D")
    return project_tangent(U_to, D)


def projection_distance(U1, U2) -> float:
    """Projection-metric distance ``||sin(theta)||_2`` between two subspaces.

    Evaluated as ``||(I - U1 U1^T) U2||_F``, which keeps full relative
    precision for nearly coincident subspaces.
    """
    U1, U2 = _check_pair(U1, U2, "U2")
    return float(np.linalg.norm(U2 - U1 @ (U1.T @ U2)))


def principal_angles(U1, U2) -> np.ndarray:
    """Principal angles in ascending order, from the SVD of ``U1^T U2``."""
    U1, U2 = _check_pair(U1, U2, "U2")
    s = np.linalg.svd(U1.T @ U2, compute_uv=False)
    return np.sort(np.arccos(np.clip(s, -1.0, 1.0)))


def random_point(d: int, p: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return orthonormalize(rng.standard_normal((d, p)))


def orthonormality_error(U) -> float:
    U = np.asarray(U, dtype=float)
    return float(np.max(np.abs(U.T @ U - np.eye(U.shape[1]))))


def _finite_scalar(value, name):
    value = float(value)
    if not np.isfinite(value):
        raise CallbackFailure(f"{name} returned a non-finite value ({value})")
    return value


def _finite_array(value, shape, name):
    value = np.asarray(value, dtype=float)
    if value.shape != shape:
        raise ShapeMismatch(f"{name} returned shape {value.shape}, expected {shape}")
    if not np.all(np.isfinite(value)):
        raise CallbackFailure(f"{name} returned non-finite entries")
    return value


def cg_minimize(
    f: Callable[[np.ndarray], float],
    egrad: Callable[[np.ndarray], np.ndarray],
    U0,
    opts: Optional[CgOptions] = None,
):
    """Minimize ``f`` over the Grassmannian by Riemannian conjugate gradient.

    Parameters
    ----------
    f : callable
        Objective, called with a ``d x p`` orthonormal array.
    egrad : callable
        Euclidean gradient of ``f`` with respect to the matrix entries.
    U0 : ndarray
        Starting point with orthonormal columns.
    opts : CgOptions, optional

    Returns
    -------
    U : ndarray
        Final iterate.
    trace : OptTrace

    Notes
    -----
    Directions combine the current Riemannian gradient with the previous
    direction after projection transport. Steps come from Armijo
    backtracking along the QR-retracted curve; the first trial step is
    ``opts.initial_step`` and later ones reuse twice the previous accepted
    step length. A non-descent direction triggers a steepest-descent restart.
    """
    opts = opts or CgOptions()
    U = np.array(U0, dtype=float)
    shape = U.shape
    restart_every = opts.restart_every or shape[0] * shape[1]

    fU = _finite_scalar(f(U), "objective")
    G = project_tangent(U, _finite_array(egrad(U), shape, "gradient"))
    gsq = float(np.sum(G * G))
    trace = OptTrace(objective_values=[fU], grad_norms=[np.sqrt(gsq)])
    D = -G
    step_length = 0.0

    for k in range(opts.max_iters):
        if np.sqrt(gsq) <= opts.grad_tol:
            trace.termination = Termination.GRAD_TOL
            break
        slope = float(np.sum(G * D))
        if slope >= 0.0:
            D = -G
            slope = -gsq
        dnorm = np.sqrt(float(np.sum(D * D)))
        t = opts.initial_step if k == 0 else step_length / dnorm

        accepted = False
        for _ in range(MAX_SHRINKS + 1):
            U_new = retract(U, D, t)
            f_new = _finite_scalar(f(U_new), "objective")
            if f_new <= fU + opts.armijo_c * t * slope and f_new < fU:
                accepted = True
                break
            t *= opts.armijo_shrink
        if not accepted:
            trace.termination = Termination.LINE_SEARCH_FAIL
            break

        G_new = project_tangent(U_new, _finite_array(egrad(U_new), shape, "gradient"))
        gsq_new = float(np.sum(G_new * G_new))
        if (k + 1) % restart_every == 0:
            beta = 0.0
        elif opts.beta_rule is BetaRule.FLETCHER_REEVES:
            beta = gsq_new / gsq
        else:
            G_old = transport(U, U_new, G)
            beta = max(0.0, float(np.sum(G_new * (G_new - G_old))) / gsq)
        D = -G_new + beta * transport(U, U_new, D)

        step_length = 2.0 * t * dnorm
        U, fU, G, gsq = U_new, f_new, G_new, gsq_new
        trace.objective_values.append(fU)
        trace.grad_norms.append(np.sqrt(gsq))
        trace.iterations_run += 1
    else:
        trace.termination = Termination.MAX_ITERS
        if np.sqrt(gsq) <= opts.grad_tol:
            trace.termination = Termination.GRAD_TOL

    return U, trace
