import numpy as np
import pytest

from wignerhvm.phase_space import Context
from wignerhvm.weyl import (PolynomialObservable, check_wigner_multiplicativity,
                            conjugate_by_metaplectic, gaussian_moment,
                            metaplectic_covariance_suite, monomial,
                            plain_product, quantize_linear,
                            quantize_polynomial, smoothed_polynomial,
                            trusted_block_mask)

CUTOFF = 40


def ctx_single():
    return Context([[1.0, 0.0]])


def ctx_two_positions():
    e = np.eye(4)
    return Context([e[0], e[1]])


def ctx_q1_p2():
    e = np.eye(4)
    return Context([e[0], e[3]])


def test_quantize_linear_position_matrix():
    q = quantize_linear([1, 0], 8).matrix
    for n in range(7):
        assert abs(q[n, n + 1] - np.sqrt((n + 1) / 2)) < 1e-14
        assert abs(q[n + 1, n] - np.sqrt((n + 1) / 2)) < 1e-14
    assert np.max(np.abs(np.diag(q))) == 0


def test_quantize_linear_zero_vector():
    z = quantize_linear([0, 0], 6).matrix
    assert np.max(np.abs(z)) == 0


def test_canonical_commutator_below_edge():
    q = quantize_linear([1, 0], 20).matrix
    p = quantize_linear([0, 1], 20).matrix
    comm = q @ p - p @ q
    block = comm[:19, :19]
    assert np.max(np.abs(block - 1j * np.eye(19))) < 1e-12


def test_quantize_polynomial_degree_one():
    obs = monomial(ctx_single(), (1,))
    got = quantize_polynomial(obs, 12)
    assert np.allclose(got, quantize_linear([1, 0], 12).matrix)


def test_quantize_polynomial_cross_mode_product():
    # different tensor factors commute exactly, so the symmetrized product
    # equals the plain product with no truncation caveat
    obs = monomial(ctx_two_positions(), (1, 1))
    sym = quantize_polynomial(obs, 8)
    plain = plain_product(obs, 8)
    assert np.max(np.abs(sym - plain)) < 1e-12


def test_quantize_polynomial_square_low_block():
    obs = monomial(ctx_single(), (2,))
    got = quantize_polynomial(obs, 16)
    q = quantize_linear([1, 0], 16).matrix
    direct = q @ q
    mask = trusted_block_mask(16, 1, 2)
    sub = np.ix_(mask, mask)
    assert np.max(np.abs(got[sub] - direct[sub])) < 1e-8


def test_symmetrized_vs_plain_on_commuting_context():
    obs = PolynomialObservable(ctx_q1_p2(), [(1.0, (1, 2)), (0.5, (2, 0))])
    cutoff = 10
    sym = quantize_polynomial(obs, cutoff)
    plain = plain_product(obs, cutoff)
    mask = trusted_block_mask(cutoff, 2, 3)
    sub = np.ix_(mask, mask)
    assert np.max(np.abs(sym[sub] - plain[sub])) < 1e-8


def test_polynomial_observable_validation():
    with pytest.raises(ValueError):
        PolynomialObservable(ctx_single(), [(1.0, (7,))])
    with pytest.raises(ValueError):
        PolynomialObservable(ctx_single(), [(1.0, (1, 1))])


def test_polynomial_evaluation():
    obs = PolynomialObservable(ctx_q1_p2(), [(2.0, (1, 1)), (1.0, (0, 2))])
    assert obs(3.0, -1.0) == 2 * 3 * (-1) + 1.0


def test_conjugate_identity():
    q = quantize_linear([1, 0], 20).matrix
    out = conjugate_by_metaplectic(q, np.eye(2), 20)
    assert np.max(np.abs(out - q)) < 1e-12


def test_conjugate_rotation_quarter_turn():
    th = np.pi / 2
    S = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    q = quantize_linear([1, 0], 30).matrix
    got = conjugate_by_metaplectic(q, S, 30)
    want = quantize_linear(S.T @ np.array([1.0, 0.0]), 30).matrix  # -> -p
    assert np.max(np.abs(got[:24, :24] - want[:24, :24])) < 1e-10


def test_conjugate_squeeze_scales_position():
    S = np.diag([np.exp(-0.3), np.exp(0.3)])
    q = quantize_linear([1, 0], 40).matrix
    got = conjugate_by_metaplectic(q, S, 40)
    assert np.max(np.abs(got[:12, :12] - np.exp(-0.3) * q[:12, :12])) < 1e-6


def test_conjugate_rejects_non_symplectic():
    with pytest.raises(ValueError):
        conjugate_by_metaplectic(np.eye(10), 2 * np.eye(2), 10)


def test_metaplectic_covariance_suite():
    rng = np.random.default_rng(0)
    report = metaplectic_covariance_suite(rng, trials=20)
    assert report["pass"]
    assert report["max_deviation"] <= 1e-6


def test_gaussian_moment_formulas():
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert gaussian_moment(cov, (1, 0)) == 0.0
    assert abs(gaussian_moment(cov, (2, 0)) - 2.0) < 1e-14
    assert abs(gaussian_moment(cov, (4, 0)) - 3 * 4.0) < 1e-14
    assert abs(gaussian_moment(cov, (1, 1)) - 0.3) < 1e-14
    assert abs(gaussian_moment(cov, (2, 2))
               - (2 * 1 + 2 * 0.3 ** 2)) < 1e-14


def test_smoothed_polynomial_square_shift():
    obs = monomial(ctx_single(), (2,))
    vals = [np.array([0.0, 1.0, 2.0])]
    out = smoothed_polynomial(obs, vals)
    assert np.allclose(out, vals[0] ** 2 + 0.5)


def test_multiplicativity_linear_and_square():
    rep = check_wigner_multiplicativity(monomial(ctx_single(), (1,)), CUTOFF)
    assert rep["pass"] and rep["sup_norm_deviation"] < 1e-3
    rep = check_wigner_multiplicativity(monomial(ctx_single(), (2,)), CUTOFF)
    assert rep["pass"]
    assert rep["pairing_deviation"] < 1e-6


def test_multiplicativity_cross_mode():
    # the corner of the |z| <= 3 window needs per-mode levels ~ |z|^2 + margin
    rep = check_wigner_multiplicativity(monomial(ctx_q1_p2(), (1, 1)), 26)
    assert rep["pass"], rep


def test_multiplicativity_degraded_cutoff_flagged():
    rep = check_wigner_multiplicativity(monomial(ctx_single(), (2,)), 8)
    assert not rep["pass"]
    assert rep["truncation_flagged"]
    assert rep["inner_sup_deviation"] < 0.1 * rep["sup_norm_deviation"]
