"""Truncated-Fock-space matrix building blocks.

All operators use hbar = 1 with q = (a + a^dag)/sqrt(2) and
p = (a - a^dag)/(i sqrt(2)), so [q, p] = i below the truncation edge.
Multimode operators act on the Kronecker product of per-mode spaces with
mode 0 as the leftmost factor.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm, logm
from scipy.special import eval_genlaguerre, gammaln

from .phase_space import euler_decompose, is_symplectic


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)


def creation(cutoff: int) -> np.ndarray:
    return annihilation(cutoff).conj().T


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff)).astype(complex)


def position_operator(cutoff: int) -> np.ndarray:
    a = annihilation(cutoff)
    return (a + a.conj().T) / np.sqrt(2)


def momentum_operator(cutoff: int) -> np.ndarray:
    a = annihilation(cutoff)
    return 1j * (a.conj().T - a) / np.sqrt(2)


def mode_operator(op: np.ndarray, mode: int, mode_count: int) -> np.ndarray:
    """Embed a single-mode operator into the mode_count-mode product space."""
    cutoff = op.shape[0]
    out = np.array([[1.0 + 0j]])
    for k in range(mode_count):
        out = np.kron(out, op if k == mode else np.eye(cutoff, dtype=complex))
    return out


def quadrature_operators(mode_count: int, cutoff: int) -> list[np.ndarray]:
    """The vector R_hat = (q_1..q_m, p_1..p_m) as truncated matrices."""
    q = position_operator(cutoff)
    p = momentum_operator(cutoff)
    ops = [mode_operator(q, k, mode_count) for k in range(mode_count)]
    ops += [mode_operator(p, k, mode_count) for k in range(mode_count)]
    return ops


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """Matrix of D(alpha) = exp(alpha a^dag - conj(alpha) a), entrywise exact.

    <m|D|n> = sqrt(n!/m!) alpha^(m-n) e^(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)
    for m >= n, and the conjugate-reflected form below the diagonal.
    """
    x = abs(alpha) ** 2
    env = np.exp(-x / 2)
    D = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(cutoff):
        for m in range(cutoff):
            lo, hi = min(m, n), max(m, n)
            k = hi - lo
            pref = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)))
            lag = eval_genlaguerre(lo, k, x)
            if m >= n:
                D[m, n] = pref * alpha ** k * env * lag
            else:
                D[m, n] = pref * (-np.conj(alpha)) ** k * env * lag
    return D


def multimode_displacement(mean, cutoff: int) -> np.ndarray:
    """Displacement by a phase-space vector (q-block, p-block ordering)."""
    mean = np.asarray(mean, dtype=float)
    m = mean.size // 2
    out = np.array([[1.0 + 0j]])
    for k in range(m):
        alpha = (mean[k] + 1j * mean[m + k]) / np.sqrt(2)
        out = np.kron(out, displacement_matrix(alpha, cutoff))
    return out


def squeeze_matrix(r: float, cutoff: int) -> np.ndarray:
    """Single-mode squeeze with M^dag q M = e^(-r) q (shrinks q for r > 0)."""
    a = annihilation(cutoff)
    return expm((r / 2) * (a @ a - a.conj().T @ a.conj().T))


def displacement_element_tables(cutoff: int, alphas: np.ndarray) -> np.ndarray:
    """Dense table d[m, n, j] = <m|D(alphas[j])|n> for a flat alpha array.

    Built by the stable three-term Laguerre recurrence in n per diagonal
    offset, so no factorials appear.
    """
    alphas = np.asarray(alphas, dtype=complex).reshape(-1)
    x = np.abs(alphas) ** 2
    env = np.exp(-x / 2)
    table = np.zeros((cutoff, cutoff, alphas.size), dtype=complex)
    for k in range(cutoff):
        # prefactor sqrt(n!/(n+k)!) tracked multiplicatively
        pref = np.exp(0.5 * (gammaln(1) - gammaln(k + 1)))
        lag_prev = np.zeros_like(x)
        lag = np.ones_like(x)
        up = alphas ** k * env
        down = (-np.conj(alphas)) ** k * env
        for n in range(cutoff - k):
            term = pref * lag
            table[n + k, n] = term * up
            if k > 0:
                table[n, n + k] = term * down
            lag_prev, lag = lag, (
                (2 * n + k + 1 - x) * lag - (n + k) * lag_prev) / (n + 1)
            pref *= np.sqrt((n + 1) / (n + 1 + k))
    return table


def passive_unitary(u: np.ndarray, cutoff: int) -> np.ndarray:
    """Fock-space unitary of a passive (beamsplitter/phase) transformation.

    For a unitary u on the mode operators, returns M with M^dag a_j M =
    sum_k u_jk a_k, i.e. M^dag R_hat M = K R_hat for the orthogonal
    symplectic K = [[Re u, -Im u], [Im u, Re u]].
    """
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    if np.max(np.abs(u @ u.conj().T - np.eye(m))) > 1e-8:
        raise ValueError("mode transformation is not unitary")
    h = -1j * logm(u)
    h = (h + h.conj().T) / 2
    a_ops = [mode_operator(annihilation(cutoff), k, m) for k in range(m)]
    ham = np.zeros((cutoff ** m, cutoff ** m), dtype=complex)
    for j in range(m):
        for k in range(m):
            if h[j, k] != 0:
                ham += h[j, k] * a_ops[j].conj().T @ a_ops[k]
    return expm(1j * ham)


def orthogonal_symplectic_to_unitary(K: np.ndarray) -> np.ndarray:
    """Extract the m x m mode unitary from an orthogonal symplectic matrix."""
    K = np.asarray(K, dtype=float)
    m = K.shape[0] // 2
    u = K[:m, :m] + 1j * K[m:, :m]
    if np.max(np.abs(u @ u.conj().T - np.eye(m))) > 1e-8:
        raise ValueError("matrix is not orthogonal symplectic")
    return u


def metaplectic_operator(S: np.ndarray, cutoff: int) -> np.ndarray:
    """Fock-space unitary M with M^dag R_hat M = S R_hat (low-block sense).

    Built from the Euler factorization S = K1 Z K2: passive unitaries for
    K1, K2 and a per-mode squeeze for Z, each exponentiated on the
    truncated space.
    """
    S = np.asarray(S, dtype=float)
    m = S.shape[0] // 2
    if not is_symplectic(S, tol=1e-8):
        raise ValueError("matrix is not symplectic")
    K1, d, K2 = euler_decompose(S)
    u1 = orthogonal_symplectic_to_unitary(K1)
    u2 = orthogonal_symplectic_to_unitary(K2)
    # Z = diag(d, 1/d) scales q_i by d_i; squeeze_matrix(r) scales q by e^-r.
    squeezes = np.array([[1.0 + 0j]])
    for di in d:
        squeezes = np.kron(squeezes, squeeze_matrix(-np.log(di), cutoff))
    return passive_unitary(u1, cutoff) @ squeezes @ passive_unitary(u2, cutoff)


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal oscillator eigenfunctions psi_0..psi_n_max on the axis x.

    Upward recurrence on the normalized functions; the per-step square-root
    coefficients keep every row O(1), so no factorial overflow occurs.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((n_max + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = (np.sqrt(2.0 / (n + 1)) * x * out[n]
                      - np.sqrt(n / (n + 1)) * out[n - 1])
    return out


def partial_trace_keep_first(rho: np.ndarray, cutoff: int,
                             mode_count: int) -> np.ndarray:
    """Trace out all modes except mode 0."""
    if mode_count == 1:
        return rho
    rest = cutoff ** (mode_count - 1)
    r4 = rho.reshape(cutoff, rest, cutoff, rest)
    return np.einsum("ikjk->ij", r4)
