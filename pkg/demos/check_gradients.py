"""
Checking the gradient two ways
==============================

The violation-count gradient against the explicit outer-product sum,
and both against central differences along the retraction.
"""

import numpy as np

from grasspool.diagnostics import FD_RTOL, ROUTE_ATOL, directional_fd_error, random_instance, run_gradcheck
from grasspool.grassmann import project_tangent
from grasspool.grp import grp_gradient_fast, grp_gradient_naive

rng = np.random.default_rng(7)
U, X, params = random_instance(rng, n=20, d=30, p=3)
print("eta chosen away from hinge kinks: %.4f" % params.eta)

diff = np.max(np.abs(grp_gradient_fast(U, X, params) - grp_gradient_naive(U, X, params)))
print("fast vs naive max abs diff: %.2e (tol %g)" % (diff, ROUTE_ATOL))

D = project_tangent(U, rng.standard_normal(U.shape))
D /= np.linalg.norm(D)
print("directional FD relative error: %.2e (tol %g)" % (directional_fd_error(U, X, params, D), FD_RTOL))

res = run_gradcheck(trials=5)
print("suite:", res, "passed" if res.passed else "FAILED")
