import numpy as np
import pytest

from gradcomp.linalg import (NotConverged, NotStabilizable, SpectralRadiusError,
                             gaussian_matrix, make_rng, random_spd,
                             random_spd_with_spectral_radius, solve_dare,
                             solve_discrete_lyapunov, spectral_radius)


def test_gaussian_matrix_deterministic_and_shaped():
    a = gaussian_matrix(make_rng(7), 2, 2)
    b = gaussian_matrix(make_rng(7), 2, 2)
    np.testing.assert_array_equal(a, b)
    assert gaussian_matrix(make_rng(0), 3, 4).shape == (3, 4)


def test_gaussian_matrix_sample_moments():
    sample = gaussian_matrix(make_rng(42), 1000, 1)
    assert -0.15 < sample.mean() < 0.15
    assert 0.8 < sample.var() < 1.2


def test_gaussian_matrix_rejects_bad_shape():
    with pytest.raises(ValueError):
        gaussian_matrix(make_rng(0), 0, 3)


def test_random_spd_scalar_is_square_of_draw():
    rng = make_rng(3)
    p = random_spd(rng, 1)
    assert p.shape == (1, 1) and p[0, 0] > 0


def test_random_spd_symmetric_positive():
    rng = make_rng(11)
    p = random_spd(rng, 4)
    assert np.abs(p - p.T).max() == 0.0
    probe_rng = make_rng(99)
    for _ in range(20):
        x = probe_rng.standard_normal(4)
        assert x @ p @ x > 0.0
    # independent eigenvalue check of positive definiteness
    assert np.linalg.eigvalsh(p).min() > 0.0


def test_random_spd_with_spectral_radius_pins_max_eigenvalue():
    q = random_spd_with_spectral_radius(make_rng(5), 4, 10.0)
    assert np.abs(q - q.T).max() <= 1e-12
    eigs = np.linalg.eigvalsh(q)
    assert abs(eigs.max() - 10.0) <= 1e-9
    assert eigs.min() > 0.0


def test_random_spd_with_spectral_radius_scalar():
    q = random_spd_with_spectral_radius(make_rng(1), 1, 10.0)
    np.testing.assert_allclose(q, [[10.0]])


def test_lyapunov_zero_dynamics_returns_weight():
    w = np.array([[2.0, 0.5], [0.5, 3.0]])
    x = solve_discrete_lyapunov(np.zeros((2, 2)), w)
    np.testing.assert_array_equal(x, w)


def test_lyapunov_scalar_closed_form():
    # a = 0.5, w = 3: x = w / (1 - a^2) = 4
    x = solve_discrete_lyapunov(np.array([[0.5]]), np.array([[3.0]]))
    np.testing.assert_allclose(x, [[4.0]], atol=1e-12)


def test_lyapunov_residual_on_random_stable_instance():
    rng = make_rng(8)
    g = gaussian_matrix(rng, 4, 4)
    acl = g * (0.8 / spectral_radius(g))
    w = random_spd(rng, 4)
    x = solve_discrete_lyapunov(acl, w, tol=1e-12)
    residual = np.linalg.norm(acl.T @ x @ acl - x + w, "fro")
    assert residual <= 1e-10
    assert np.abs(x - x.T).max() <= 1e-10


def test_lyapunov_unstable_raises():
    acl = np.array([[1.5, 0.0], [0.0, 0.2]])
    with pytest.raises(SpectralRadiusError):
        solve_discrete_lyapunov(acl, np.eye(2))


def test_dare_no_dynamics():
    p, k = solve_dare(np.zeros((2, 2)), np.eye(2), 3.0 * np.eye(2), np.eye(2))
    np.testing.assert_allclose(p, 3.0 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(k, np.zeros((2, 2)), atol=1e-12)


def test_dare_scalar_closed_form():
    # a = b = 1, q = 2, r = 1: p solves p = 2 + p - p^2/(1+p), so p = 1 + sqrt(3).
    a = np.array([[1.0]])
    b = np.array([[1.0]])
    p, k = solve_dare(a, b, np.array([[2.0]]), np.array([[1.0]]))
    p_true = 1.0 + np.sqrt(3.0)
    np.testing.assert_allclose(p, [[p_true]], atol=1e-9)
    np.testing.assert_allclose(k, [[p_true / (1.0 + p_true)]], atol=1e-9)
    residual = 2.0 + p[0, 0] - p[0, 0] ** 2 / (1.0 + p[0, 0]) - p[0, 0]
    assert abs(residual) <= 1e-10


def test_dare_random_instance_self_consistent():
    rng = make_rng(12)
    a = gaussian_matrix(rng, 4, 4)
    b = gaussian_matrix(rng, 4, 3)
    q = 2.0 * np.eye(4)
    r = np.eye(3)
    p, k = solve_dare(a, b, q, r)
    # substituting the solution back into the iteration map barely moves it
    btp = b.T @ p
    k2 = np.linalg.solve(r + btp @ b, btp @ a)
    p2 = q + a.T @ p @ a - a.T @ p @ b @ k2
    assert np.linalg.norm(p2 - p, "fro") <= 1e-8
    assert np.abs(p - p.T).max() <= 1e-10
    assert spectral_radius(a - b @ k) < 1.0


def test_dare_rejects_unstabilizable_pair():
    # unreachable unstable mode: x2 grows regardless of input, so the value
    # iteration blows up (or, if it settled, the gain could not stabilize)
    a = np.array([[0.5, 0.0], [0.0, 2.0]])
    b = np.array([[1.0], [0.0]])
    with np.errstate(all="ignore"), pytest.raises((NotConverged, NotStabilizable)):
        solve_dare(a, b, np.eye(2), np.eye(1), max_iter=2000)


def test_spectral_radius_diagonal():
    assert spectral_radius(np.diag([0.3, -0.9])) == pytest.approx(0.9, abs=1e-12)


def test_spectral_radius_complex_pair():
    # quarter-turn rotation scaled by 0.5: eigenvalues +/- 0.5i
    m = 0.5 * np.array([[0.0, -1.0], [1.0, 0.0]])
    assert spectral_radius(m) == pytest.approx(0.5, rel=0.05)


def test_spectral_radius_zero_matrix():
    assert spectral_radius(np.zeros((3, 3))) == 0.0
