"""Gradient checks used by the ``gradcheck`` command and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grassmann import project_tangent, random_point, retract
from .grp import GrpParams, grp_gradient_fast, grp_gradient_naive, grp_objective, projection_energies

FD_STEP = 1e-5
FD_RTOL = 1e-5
ROUTE_ATOL = 1e-11
KINK_GAP = 1e-3


def kink_free_eta(U, X, target: float = 0.1, gap: float = KINK_GAP):
    """An ``eta`` near ``target`` whose hinge margins all stay ``>= gap`` from zero.

    Returns ``None`` if no such ``eta`` exists in ``[0, 2 * target + 1]``.
    """
    e = projection_energies(U, X)
    iu = np.triu_indices(e.size, 1)
    kinks = np.sort(e[iu[1]] - e[iu[0]])  # margin i<j vanishes at eta = e_j - e_i
    hi = 2.0 * target + 1.0
    grid = np.concatenate([[target], np.linspace(0.0, hi, 4001)])
    for eta in sorted(grid, key=lambda v: abs(v - target)):
        k = np.searchsorted(kinks, eta)
        near = [abs(kinks[i] - eta) for i in (k - 1, k) if 0 <= i < kinks.size]
        if not near or min(near) >= gap:
            return float(eta)
    return None


def random_instance(rng, n, d, p, lam=10.0, target_eta=0.1):
    """Unit-row ``X``, random ``U`` and parameters with no hinge kink nearby."""
    while True:
        X = rng.standard_normal((n, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        U = random_point(d, p, rng)
        eta = kink_free_eta(U, X, target_eta)
        if eta is not None:
            return U, X, GrpParams(p=p, eta=eta, lam=lam)


def directional_fd_error(U, X, params, D, grad=grp_gradient_fast, h=FD_STEP) -> float:
    """Relative gap between ``<grad F, D>`` and a central difference along the
    retraction curve ``t -> retract(U, D, t)``. The denominator is floored at 1."""
    analytic = float(np.sum(project_tangent(U, grad(U, X, params)) * D))
    fd = (grp_objective(retract(U, D, h), X, params) - grp_objective(retract(U, D, -h), X, params)) / (2.0 * h)
    return abs(fd - analytic) / max(abs(analytic), 1.0)


@dataclass
class GradcheckResult:
    max_fd_rel_error: float
    max_route_abs_diff: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_fd_rel_error <= FD_RTOL and self.max_route_abs_diff <= ROUTE_ATOL


def run_gradcheck(n=20, d=30, p=3, trials=10, seed=0, directions=5, corrupt=False) -> GradcheckResult:
    """Finite-difference and naive-vs-fast checks on random instances.

    ``corrupt=True`` perturbs the fast gradient to exercise the failure path.
    """
    if not (n >= 2 and d >= 1 and 1 <= p <= d and trials >= 1):
        raise ValueError(f"need n >= 2, 1 <= p <= d, trials >= 1 (got n={n}, d={d}, p={p}, trials={trials})")
    rng = np.random.default_rng(seed)

    def fast(U, X, params):
        g = grp_gradient_fast(U, X, params)
        return g * 1.01 + 1e-3 if corrupt else g

    worst_fd = worst_route = 0.0
    for _ in range(trials):
        U, X, params = random_instance(rng, n, d, p)
        worst_route = max(worst_route, float(np.max(np.abs(fast(U, X, params) - grp_gradient_naive(U, X, params)))))
        for _ in range(directions):
            D = project_tangent(U, rng.standard_normal((d, p)))
            D /= np.linalg.norm(D)
            worst_fd = max(worst_fd, directional_fd_error(U, X, params, D, grad=fast))
    return GradcheckResult(worst_fd, worst_route, trials)
