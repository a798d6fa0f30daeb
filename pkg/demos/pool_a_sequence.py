"""
Pooling one sequence into a subspace
====================================

A sequence whose energy grows along one direction, pooled three ways:
the PCA subspace, GRP, and the greedy one-direction-at-a-time variant.
"""

import numpy as np

from grasspool import GrpParams, pca_subspace, pool_grp, pool_grp_incremental
from grasspool.grp import order_fractions

rng = np.random.default_rng(0)
n, d = 40, 16

# a ramp along u plus a large static component along v
u, v = np.linalg.qr(rng.standard_normal((d, 2)))[0].T
t = np.arange(1, n + 1) / n
X = np.outer(t, u) + 1.5 * np.outer(np.ones(n), v) + 0.05 * rng.standard_normal((n, d))
Xn = X / np.linalg.norm(X, axis=1, keepdims=True)

params = GrpParams(p=2, eta=0.1, lam=10.0)

U_pca = pca_subspace(Xn, 2)
print("PCA   ordered pairs: %.3f" % order_fractions(U_pca, Xn, 0.1)[0])

desc = pool_grp(X, params)
print("GRP   ordered pairs: %.3f  objective %.4f  (%d iterations, %s)"
      % (desc.constraints_satisfied_fraction, desc.final_objective,
         desc.iterations_run, desc.termination.name))

inc = pool_grp_incremental(X, params)
print("greedy ordered pairs: %.3f  objective %.4f" % (inc.constraints_satisfied_fraction, inc.final_objective))

# the descent trace is non-increasing
vals = np.array(desc.trace.objective_values)
print("trace start %.4f -> end %.4f, max increase %.2e" % (vals[0], vals[-1], np.max(np.diff(vals), initial=0.0)))
