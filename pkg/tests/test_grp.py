import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grasspool.baselines import pca_subspace
from grasspool.diagnostics import directional_fd_error, kink_free_eta, random_instance
from grasspool.errors import DegenerateSequence, ShapeMismatch
from grasspool.grassmann import (
    CgOptions,
    orthonormality_error,
    orthonormalize,
    project_tangent,
    projection_distance,
    random_point,
)
from grasspool.grp import (
    GrpParams,
    grp_gradient_fast,
    grp_gradient_naive,
    grp_objective,
    order_fractions,
    pool_grp,
    pool_grp_incremental,
    projection_energies,
    reconstruction_identity_check,
    violation_matrix,
)
from grasspool.sequence import FeatureSequence


def brute_objective(U, X, params):
    """Full d x d projector and an explicit double loop over pairs."""
    d = U.shape[0]
    P = np.eye(d) - U @ U.T
    total = 0.0
    for x in X:
        total += 0.5 * np.trace(np.outer(x, x) @ P)
    for i in range(len(X)):
        for j in range(i + 1, len(X)):
            ei = X[i] @ U @ U.T @ X[i]
            ej = X[j] @ U @ U.T @ X[j]
            total += 0.5 * params.lam * max(0.0, ei - ej + params.eta)
    return total


def unit_rows(X):
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def test_objective_full_rank_zero_margin(rng):
    X = rng.standard_normal((6, 4))
    Q = orthonormalize(rng.standard_normal((4, 4)))
    params = GrpParams(p=4, eta=0.0, lam=3.0)
    norms = np.sum(X * X, axis=1)
    hinge = sum(max(0.0, norms[i] - norms[j]) for i in range(6) for j in range(i + 1, 6))
    assert grp_objective(Q, X, params) == pytest.approx(1.5 * hinge, abs=1e-10)


def test_objective_small_lambda_is_pca_error(rng):
    X = rng.standard_normal((8, 5))
    U = random_point(5, 2, rng)
    pca_err = 0.5 * np.sum((X - X @ U @ U.T) ** 2)
    assert grp_objective(U, X, GrpParams(p=2, lam=1e-14)) == pytest.approx(pca_err, abs=1e-10)


def test_objective_matches_brute_force(rng):
    for _ in range(20):
        X = rng.standard_normal((5, 4))
        U = random_point(4, 2, rng)
        params = GrpParams(p=2, eta=float(rng.uniform(0, 1)), lam=float(rng.uniform(0.1, 20)))
        assert abs(grp_objective(U, X, params) - brute_objective(U, X, params)) <= 1e-10


def test_objective_errors():
    with pytest.raises(ShapeMismatch):
        grp_objective(np.eye(3)[:, :2], np.ones((4, 5)), GrpParams(p=2))
    with pytest.raises(ShapeMismatch):
        grp_objective(np.eye(3)[:, :1], np.ones((4, 3)), GrpParams(p=2))
    X = np.ones((4, 3))
    X[1, 1] = np.nan
    with pytest.raises(ValueError):
        grp_objective(np.eye(3)[:, :2], X, GrpParams(p=2))


def test_violation_matrix_increasing_and_reversed():
    U = np.eye(3)[:, :1]
    e = np.sqrt(np.array([0.0, 0.3, 0.6, 0.9, 1.2]))
    X = np.zeros((5, 3))
    X[:, 0] = e
    clean = violation_matrix(U, X, eta=0.2)
    assert clean.count == 0
    np.testing.assert_array_equal(clean.nu, 0)
    rev = violation_matrix(U, X[::-1], eta=0.2)
    assert rev.count == 10
    assert rev.nu[0] == 4 and rev.nu[-1] == -4


def test_violation_matrix_matches_pair_loop(rng):
    X = rng.standard_normal((12, 6))
    U = random_point(6, 2, rng)
    V = violation_matrix(U, X, eta=0.3)
    assert np.all(np.tril(V.entries) == 0)
    e = projection_energies(U, X)
    nu = np.zeros(12, dtype=int)
    for i in range(12):
        for j in range(i + 1, 12):
            if e[j] - e[i] < 0.3:
                nu[i] += 1
                nu[j] -= 1
    np.testing.assert_array_equal(V.nu, nu)
    assert V.nu.sum() == 0


def test_violation_matrix_slack():
    U = np.eye(2)[:, :1]
    X = np.array([[0.0, 1.0], [0.5, 0.0]])  # energies 0, 0.25
    assert violation_matrix(U, X, eta=0.3).count == 1
    assert violation_matrix(U, X, eta=0.3, slack=np.full((2, 2), 0.1)).count == 0


def test_gradient_no_violations(rng):
    U = np.eye(4)[:, :1]
    X = np.zeros((6, 4))
    X[:, 0] = np.arange(6.0)
    X[:, 1:] = 0.1 * rng.standard_normal((6, 3))
    params = GrpParams(p=1, eta=0.1, lam=7.0)
    assert violation_matrix(U, X, 0.1).count == 0
    expected = -(X.T @ X) @ U
    np.testing.assert_allclose(grp_gradient_naive(U, X, params), expected, atol=1e-12)
    np.testing.assert_allclose(grp_gradient_fast(U, X, params), expected, atol=1e-12)


def test_gradient_repeated_frame_cancels(rng):
    x = rng.standard_normal(5)
    X = np.tile(x, (7, 1))
    U = random_point(5, 2, rng)
    params = GrpParams(p=2, eta=0.2, lam=10.0)
    assert violation_matrix(U, X, 0.2).count == 21
    expected = -(X.T @ X) @ U
    np.testing.assert_allclose(grp_gradient_naive(U, X, params), expected, atol=1e-11)
    np.testing.assert_allclose(grp_gradient_fast(U, X, params), expected, atol=1e-11)


def test_gradient_finite_differences(rng):
    for _ in range(10):
        U, X, params = random_instance(rng, 15, 10, 2)
        for _ in range(5):
            D = project_tangent(U, rng.standard_normal(U.shape))
            D /= np.linalg.norm(D)
            assert directional_fd_error(U, X, params, D, grad=grp_gradient_naive) <= 1e-5
            assert directional_fd_error(U, X, params, D) <= 1e-5


def test_gradient_finite_differences_slack_mode(rng):
    U, X, params = random_instance(rng, 12, 8, 2)
    slack = GrpParams(p=2, eta=params.eta, lam=params.lam, use_slack=True, slack_c=1.5)
    assert slack.hinge_weight == 1.5
    D = project_tangent(U, rng.standard_normal(U.shape))
    assert directional_fd_error(U, X, slack, D / np.linalg.norm(D)) <= 1e-5


def test_fd_detects_wrong_gradient(rng):
    U, X, params = random_instance(rng, 15, 10, 2)
    D = project_tangent(U, rng.standard_normal(U.shape))
    D /= np.linalg.norm(D)
    wrong = lambda U, X, p: 1.1 * grp_gradient_fast(U, X, p)
    assert directional_fd_error(U, X, params, D, grad=wrong) > 1e-3


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), d=st.integers(1, 50), data=st.data(), seed=st.integers(0, 2**31))
def test_gradient_routes_agree(n, d, data, seed):
    p = data.draw(st.integers(1, min(d, 5)))
    r = np.random.default_rng(seed)
    X = unit_rows(r.standard_normal((n, d)))
    U = random_point(d, p, r)
    params = GrpParams(p=p, eta=float(r.uniform(0, 0.5)), lam=float(r.uniform(0.1, 20)))
    assert np.max(np.abs(grp_gradient_fast(U, X, params) - grp_gradient_naive(U, X, params))) <= 1e-11


def test_fast_gradient_without_violations_is_data_term(rng):
    X = rng.standard_normal((9, 5))
    U = random_point(5, 2, rng)
    params = GrpParams(p=2, eta=0.0, lam=1e-300)
    np.testing.assert_allclose(grp_gradient_fast(U, X, params), -X.T @ (X @ U), atol=1e-12)


def _median_runtime(fn, repeats=5, inner=20):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def test_fast_gradient_scaling_in_n(rng):
    d, p = 64, 3
    U = random_point(d, p, rng)
    params = GrpParams(p=p)
    t = []
    for n in (200, 400):
        X = unit_rows(rng.standard_normal((n, d)))
        t.append(_median_runtime(lambda: grp_gradient_fast(U, X, params)))
    assert t[1] / t[0] < 8.0


def test_reconstruction_identity_examples(rng):
    U = random_point(6, 2, rng)
    x_in = U @ np.array([0.3, -1.2])
    lhs, rhs = reconstruction_identity_check(U, x_in)
    assert abs(lhs) <= 1e-12 and abs(rhs) <= 1e-12
    x_out = rng.standard_normal(6)
    x_out -= U @ (U.T @ x_out)
    lhs, rhs = reconstruction_identity_check(U, x_out)
    assert lhs == pytest.approx(x_out @ x_out, abs=1e-12)
    assert rhs == pytest.approx(x_out @ x_out, abs=1e-12)
    with pytest.raises(ShapeMismatch):
        reconstruction_identity_check(U, np.ones(5))


def test_reconstruction_identity_random(rng):
    for _ in range(20):
        U = random_point(20, 3, rng)
        x = 5 * rng.standard_normal(20)
        lhs, rhs = reconstruction_identity_check(U, x)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, x @ x)


def test_objective_invariant_to_orthogonal_group(rng):
    X = unit_rows(rng.standard_normal((15, 8)))
    U = random_point(8, 3, rng)
    params = GrpParams(p=3)
    f = grp_objective(U, X, params)
    for _ in range(10):
        R = orthonormalize(rng.standard_normal((3, 3)))
        assert abs(grp_objective(orthonormalize(U @ R), X, params) - f) <= 1e-10


def test_pool_small_lambda_recovers_pca(rng):
    X = rng.standard_normal((25, 10))
    desc = pool_grp(X, GrpParams(p=3, lam=1e-9))
    assert projection_distance(desc.point, pca_subspace(unit_rows(X), 3)) <= 1e-4


def test_pool_monotone_sequence_orders_frames():
    # rows kept unnormalized: unit rows would flatten the planted energy ramp
    for seed in range(3):
        r = np.random.default_rng(seed)
        n, d = 30, 6
        u = r.standard_normal(d)
        u /= np.linalg.norm(u)
        X = np.outer(np.arange(1, n + 1) / n, u) + 0.01 * r.standard_normal((n, d))
        desc = pool_grp(X, GrpParams(p=1, eta=0.1, normalize=False))
        assert desc.constraints_satisfied_fraction >= 0.95


def test_pool_two_frames():
    X = np.array([[1.0, 0.0, 0.0], [0.6, 0.8, 0.0]])
    desc = pool_grp(X, GrpParams(p=1))
    assert desc.constraints_satisfied_fraction in (0.0, 1.0)
    assert orthonormality_error(desc.point) <= 1e-10
    assert desc.trace.is_monotone()


def test_pool_rejects_degenerate_input():
    with pytest.raises(DegenerateSequence):
        pool_grp(np.ones((1, 4)))
    with pytest.raises(ValueError):
        pool_grp(np.ones((5, 2)), GrpParams(p=3))


def test_pool_rank_deficient_pca_falls_back_to_random():
    X = np.outer(np.arange(1.0, 6.0), [1.0, 0.0, 0.0, 0.0])
    X[:, 1] = 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        desc = pool_grp(X, GrpParams(p=2, seed=4))
    assert desc.warnings and "random start" in desc.warnings[0]
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert orthonormality_error(desc.point) <= 1e-10


def test_pool_normalizes_rows_and_keeps_zero_rows():
    X = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 2.0], [3.0, 0.0, 4.0]])
    seq = FeatureSequence(X).normalize()
    assert seq.zero_rows.tolist() == [True, False, False]
    np.testing.assert_allclose(np.linalg.norm(seq.frames[1:], axis=1), 1.0, atol=1e-12)
    a = pool_grp(X, GrpParams(p=1))
    b = pool_grp(seq, GrpParams(p=1))
    np.testing.assert_array_equal(a.point, b.point)


def test_pool_constant_sequence_converges():
    X = np.tile([1.0, 2.0, 0.5, 0.0], (6, 1))
    with pytest.warns(RuntimeWarning, match="random start"):
        desc = pool_grp(X, GrpParams(p=2))
    assert np.isfinite(desc.final_objective)
    assert desc.trace.is_monotone()


def test_pool_random_init_is_seeded(rng):
    X = rng.standard_normal((12, 6))
    a = pool_grp(X, GrpParams(p=2, init="random", seed=3))
    b = pool_grp(X, GrpParams(p=2, init="random", seed=3))
    np.testing.assert_array_equal(a.point, b.point)


def test_incremental_p1_matches_joint(rng):
    X = rng.standard_normal((20, 8))
    params = GrpParams(p=1)
    assert projection_distance(pool_grp(X, params).point, pool_grp_incremental(X, params).point) <= 1e-8


def test_incremental_never_beats_joint(rng):
    for _ in range(8):
        n, d, p = int(rng.integers(10, 25)), int(rng.integers(5, 15)), int(rng.integers(2, 4))
        X = rng.standard_normal((n, d)) + np.outer(np.arange(n) / n, rng.standard_normal(d))
        params = GrpParams(p=p)
        joint = pool_grp(X, params)
        inc = pool_grp_incremental(X, params)
        assert joint.final_objective <= inc.final_objective + 1e-8
        assert orthonormality_error(inc.point) <= 1e-10


def test_ordering_beats_unconstrained_control():
    # planted energy ramp along a 2-plane, plus a strong static direction
    gains = []
    for seed in range(20):
        r = np.random.default_rng(seed)
        n, d = 30, 12
        W = orthonormalize(r.standard_normal((d, 3)))
        t = np.arange(1, n + 1) / n
        X = np.outer(t, W[:, 0]) + np.outer(np.sin(np.pi * t), W[:, 1]) + 1.5 * np.outer(np.ones(n), W[:, 2])
        X = X + 0.05 * r.standard_normal((n, d))
        grp = pool_grp(X, GrpParams(p=2, eta=0.1))
        ctl = pool_grp(X, GrpParams(p=2, eta=0.1, lam=1e-9))
        gains.append(grp.constraints_satisfied_fraction - ctl.constraints_satisfied_fraction)
    assert np.mean(gains) > 0


def test_order_fractions_definitions():
    U = np.eye(2)[:, :1]
    X = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])  # energies 0, .25, 1
    frac, margin = order_fractions(U, X, eta=0.5)
    assert frac == 1.0
    assert margin == pytest.approx(2 / 3)


def test_kink_free_eta_avoids_kinks(rng):
    X = unit_rows(rng.standard_normal((20, 6)))
    U = random_point(6, 2, rng)
    eta = kink_free_eta(U, X)
    e = projection_energies(U, X)
    iu = np.triu_indices(20, 1)
    assert np.min(np.abs(e[iu[0]] - e[iu[1]] + eta)) >= 1e-3


def test_params_validation():
    for kw in (dict(p=0), dict(eta=-1.0), dict(lam=0.0), dict(init="svd"), dict(use_slack=True, slack_c=0.0)):
        with pytest.raises(ValueError):
            GrpParams(**kw)
    assert GrpParams(cg=CgOptions(max_iters=5)).cg.max_iters == 5
