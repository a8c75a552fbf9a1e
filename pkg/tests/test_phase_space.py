import numpy as np
import pytest

from wignerhvm.phase_space import (ALGEBRAIC_TOL, Context,
                                   context_to_standard_basis, euler_decompose,
                                   is_context, is_symplectic, omega,
                                   plane_decomposition_vectors,
                                   planewise_decomposition_commutes,
                                   random_symplectic, symplectic_form,
                                   williamson)


def test_symplectic_form_examples():
    assert symplectic_form([1, 0], [0, 1]) == -1.0
    assert symplectic_form([3, 7], [3, 7]) == 0.0
    assert symplectic_form([1, 0, 0, 0], [0, 1, 0, 0]) == 0.0


def test_symplectic_form_antisymmetry_exact():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = int(rng.integers(1, 5))
        u = rng.uniform(-10, 10, 2 * m)
        v = rng.uniform(-10, 10, 2 * m)
        assert symplectic_form(u, v) == -symplectic_form(v, u)


def test_symplectic_form_bilinearity():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = int(rng.integers(1, 4))
        u, w, v = (rng.uniform(-10, 10, 2 * m) for _ in range(3))
        a, b = rng.uniform(-10, 10, 2)
        lhs = symplectic_form(a * u + b * w, v)
        rhs = a * symplectic_form(u, v) + b * symplectic_form(w, v)
        assert abs(lhs - rhs) < 1e-10


def test_symplectic_form_dimension_mismatch():
    with pytest.raises(ValueError):
        symplectic_form([1, 0], [1, 0, 0, 0])


def test_is_context_examples():
    assert is_context([[1, 0, 0, 0], [0, 1, 0, 0]])
    assert not is_context([[1, 0], [0, 1]])
    assert not is_context([[1, 0, 0, 0], [2, 0, 0, 0]])


def test_context_rejects_degenerate():
    with pytest.raises(ValueError):
        Context([[1, 0], [2, 0]])


def test_basis_change_identity_case():
    S = context_to_standard_basis(Context([[1.0, 0.0]]))
    assert np.allclose(S, np.eye(2), atol=1e-12)


def test_basis_change_momentum_generator():
    gen = np.array([0.0, 1.0, 0.0, 0.0])
    S = context_to_standard_basis(Context([gen]))
    assert np.allclose(gen @ S, [1, 0, 0, 0], atol=1e-10)
    assert is_symplectic(S)


def test_basis_change_scaled_generator_is_squeeze():
    gen = np.array([2.0, 0.0])
    S = context_to_standard_basis(Context([gen]))
    assert np.allclose(gen @ S, [1, 0], atol=1e-10)
    assert is_symplectic(S)


def test_basis_change_random_contexts():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = int(rng.integers(1, 5))
        k = int(rng.integers(1, m + 1))
        T = random_symplectic(m, rng, scale=0.4)
        gens = [T @ np.eye(2 * m)[:, i] for i in range(k)]
        ctx = Context(gens)
        S = context_to_standard_basis(ctx)
        assert is_symplectic(S, tol=1e-9)
        image = ctx.generators @ S
        assert np.allclose(image, np.eye(2 * m)[:k], atol=1e-9)


def test_plane_decomposition_examples():
    u, v, u2, v2 = plane_decomposition_vectors(1.0, 1.0, 0, 1, 2)
    assert planewise_decomposition_commutes(u, v, u2, v2)
    u, v, u2, v2 = plane_decomposition_vectors(0.0, 0.0, 0, 1, 2)
    assert planewise_decomposition_commutes(u, v, u2, v2)


def test_plane_decomposition_random():
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = 3
        i, j = rng.choice(m, size=2, replace=False)
        alpha, beta = rng.uniform(-10, 10, 2)
        vecs = plane_decomposition_vectors(alpha, beta, int(i), int(j), m)
        assert planewise_decomposition_commutes(*vecs, tol=ALGEBRAIC_TOL)


def test_assignment_additivity_and_decomposition():
    # phi . zeta is additive for every pair, and reconstructing the value of
    # u + v through the two-plane split returns the same linear functional
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = int(rng.integers(2, 5))
        phi = rng.uniform(-5, 5, 2 * m)
        z1, z2 = rng.uniform(-5, 5, (2, 2 * m))
        assert abs(phi @ (z1 + z2) - (phi @ z1 + phi @ z2)) < 1e-10
        i, j = rng.choice(m, size=2, replace=False)
        alpha, beta = rng.uniform(-10, 10, 2)
        u, v, u2, v2 = plane_decomposition_vectors(
            alpha, beta, int(i), int(j), m)
        direct = phi @ (u + v)
        split = 0.5 * (phi @ (u + v + u2 + v2) + phi @ (u + v - u2 - v2))
        assert abs(direct - split) < 1e-10


def test_random_symplectic_is_symplectic():
    rng = np.random.default_rng(6)
    for m in (1, 2, 3):
        assert is_symplectic(random_symplectic(m, rng), tol=1e-9)


def test_euler_decompose_reconstructs():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = int(rng.integers(1, 3))
        S = random_symplectic(m, rng, scale=0.5)
        K1, d, K2 = euler_decompose(S)
        w = omega(m)
        for K in (K1, K2):
            assert np.allclose(K.T @ K, np.eye(2 * m), atol=1e-9)
            assert np.allclose(K.T @ w @ K, w, atol=1e-9)
        assert np.all(d >= 1 - 1e-9)
        Z = np.diag(np.concatenate([d, 1 / d]))
        assert np.allclose(K1 @ Z @ K2, S, atol=1e-8)


def test_euler_decompose_orthogonal_input():
    # degenerate unit-eigenvalue pairing path
    th = 0.7
    S = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    K1, d, K2 = euler_decompose(S)
    assert np.allclose(d, [1.0])
    assert np.allclose(K1 @ np.diag([1, 1]) @ K2, S, atol=1e-10)


def test_williamson_recovers_symplectic_spectrum():
    rng = np.random.default_rng(8)
    for _ in range(30):
        m = int(rng.integers(1, 3))
        nu = np.sort(rng.uniform(0.5, 3.0, m))[::-1]
        T = random_symplectic(m, rng, scale=0.4)
        V = T @ np.diag(np.concatenate([nu, nu])) @ T.T
        S, nu_out = williamson(V)
        assert is_symplectic(S, tol=1e-8)
        D = np.diag(np.concatenate([nu_out, nu_out]))
        assert np.allclose(S @ D @ S.T, V, atol=1e-8)
        assert np.allclose(np.sort(nu_out), np.sort(nu), atol=1e-8)


def test_williamson_vacuum():
    S, nu = williamson(0.5 * np.eye(2))
    assert np.allclose(nu, [0.5])
