"""Truncated-Fock quantum oracle: homodyne statistics as ground truth.

Gaussian states get closed-form normal statistics.  Fock-represented
states are handled by symplectically rotating the measured quadrature
onto the first position axis (basis change + metaplectic conjugation) and
expanding the reduced state in oscillator eigenfunctions, which keeps the
truncation error away from the spectral edge of the raw quadrature
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from . import fockspace
from .phase_space import Context, context_to_standard_basis
from .states import FockDensityOperator, GaussianState, gaussian_to_fock
from .weyl import PolynomialObservable, quantize_polynomial, trusted_block_mask

DENSITY_AXIS_POINTS = 2048
DENSITY_AXIS_HALFWIDTH = 12.0


class ExpectationLeakageError(ValueError):
    """Truncation leakage too large for the requested expectation value."""


@dataclass(frozen=True)
class BinSpec:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1 or self.hi <= self.lo:
            raise ValueError("bad bin specification")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count + 1)


@dataclass
class OutcomeDistribution:
    bin_edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.size != self.bin_edges.size - 1:
            raise ValueError("need one mass per bin")
        if np.any(self.masses < -1e-12):
            raise ValueError("negative bin mass")


def distribution_to_csv(dist: OutcomeDistribution, path) -> None:
    """Write one row per bin: bin_left, bin_right, mass."""
    rows = np.column_stack([dist.bin_edges[:-1], dist.bin_edges[1:],
                            dist.masses])
    np.savetxt(path, rows, delimiter=",",
               header="bin_left,bin_right,mass", comments="")


def tv_distance(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    """Half the L1 distance between two distributions on identical bins."""
    if a.bin_edges.size != b.bin_edges.size or \
            np.max(np.abs(a.bin_edges - b.bin_edges)) > 1e-12:
        raise ValueError("bin edges differ")
    return float(0.5 * np.sum(np.abs(a.masses - b.masses)))


def _gaussian_marginal(state: GaussianState, zeta: np.ndarray):
    mean = float(zeta @ state.mean)
    var = float(zeta @ state.covariance @ zeta)
    return mean, var


def _reduced_rotated_state(rho: FockDensityOperator, zeta: np.ndarray):
    """Single-mode density matrix whose q-distribution is that of zeta.R."""
    ctx = Context([zeta])
    C = context_to_standard_basis(ctx)
    S = np.linalg.inv(C)  # e_1^T S = zeta^T, so M rho M^dag measures q_1
    if np.max(np.abs(S - np.eye(S.shape[0]))) < 1e-12:
        reduced = fockspace.partial_trace_keep_first(
            rho.matrix, rho.cutoff, rho.mode_count)
    else:
        M = fockspace.metaplectic_operator(S, rho.cutoff)
        rotated = M @ rho.matrix @ M.conj().T
        reduced = fockspace.partial_trace_keep_first(
            rotated, rho.cutoff, rho.mode_count)
    trace = float(np.trace(reduced).real)
    if trace < 0.5:
        raise ValueError("rotation lost most of the state; cutoff too small")
    return reduced / trace


def homodyne_density(state, zeta, axis: np.ndarray) -> np.ndarray:
    """Probability density of the observable zeta . R_hat on the given axis."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    if not np.any(zeta):
        raise ValueError("observable label must be nonzero")
    if isinstance(state, GaussianState):
        mean, var = _gaussian_marginal(state, zeta)
        return norm.pdf(axis, loc=mean, scale=np.sqrt(var))
    reduced = _reduced_rotated_state(state, zeta)
    psi = fockspace.hermite_functions(state.cutoff - 1, axis)
    density = np.einsum("ms,mn,ns->s", psi, reduced, psi).real
    return np.clip(density, 0.0, None)


def quantum_homodyne_distribution(state, zeta,
                                  bins: BinSpec) -> OutcomeDistribution:
    """Binned distribution of zeta . R_hat: Tr[rho Pi(bin)] per bin."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    edges = bins.edges
    if isinstance(state, GaussianState):
        mean, var = _gaussian_marginal(state, zeta)
        cdf = norm.cdf(edges, loc=mean, scale=np.sqrt(var))
        return OutcomeDistribution(edges, np.diff(cdf))
    axis = np.linspace(min(-DENSITY_AXIS_HALFWIDTH, bins.lo),
                       max(DENSITY_AXIS_HALFWIDTH, bins.hi),
                       DENSITY_AXIS_POINTS)
    density = homodyne_density(state, zeta, axis)
    cum = np.concatenate([[0.0], np.cumsum(
        (density[1:] + density[:-1]) / 2 * np.diff(axis))])
    cdf_at_edges = np.interp(edges, axis, cum)
    return OutcomeDistribution(edges, np.diff(cdf_at_edges))


def _normalize_intervals(intervals):
    out = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if b <= a:
            raise ValueError("empty interval")
        out.append((a, b))
    out.sort()
    for (a1, b1), (a2, b2) in zip(out, out[1:]):
        if a2 < b1:
            raise ValueError("overlapping intervals")
    return out


def event_probability(state, zeta, intervals) -> float:
    """Tr[rho Pi_{zeta.R}(X)] for X a finite union of intervals."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    intervals = _normalize_intervals(intervals)
    if isinstance(state, GaussianState):
        mean, var = _gaussian_marginal(state, zeta)
        sd = np.sqrt(var)
        return float(sum(norm.cdf(b, mean, sd) - norm.cdf(a, mean, sd)
                         for a, b in intervals))
    reduced = _reduced_rotated_state(state, zeta)
    cutoff = reduced.shape[0]

    def density(s):
        psi = fockspace.hermite_functions(cutoff - 1, np.atleast_1d(s))[:, 0]
        return float(np.real(psi @ reduced @ psi))

    bound = DENSITY_AXIS_HALFWIDTH + 4
    total = 0.0
    for a, b in intervals:
        a = max(a, -bound)
        b = min(b, bound)
        if b <= a:
            continue
        val, _ = quad(density, a, b, limit=200)
        total += val
    return float(total)


@dataclass
class ExpectationResult:
    value: float
    truncation_bound: float


def expectation(state, obs: PolynomialObservable,
                cutoff: int | None = None) -> ExpectationResult:
    """Tr[rho f(zeta_1.R, ...)] restricted to the trusted Fock block.

    The block keeps per-mode levels at least 2*degree below the cutoff,
    since each quadrature factor couples one level upward; the leaked
    weight times the block-maximal observable scale bounds the error.
    """
    if isinstance(state, GaussianState):
        rho = gaussian_to_fock(state, cutoff or 40)
    else:
        rho = state
    A = quantize_polynomial(obs, rho.cutoff)
    mask = trusted_block_mask(rho.cutoff, rho.mode_count, obs.degree)
    sub = np.ix_(mask, mask)
    rho_block = rho.matrix[sub]
    a_block = A[sub]
    value = float(np.trace(rho_block @ a_block).real)
    leak = max(0.0, 1.0 - float(np.trace(rho_block).real))
    bound = leak * float(np.max(np.abs(np.diag(a_block))))
    if bound > 1e-3 * max(1.0, abs(value)):
        raise ExpectationLeakageError(
            f"truncation bound {bound:.2e} too large for value {value:.3e}")
    return ExpectationResult(value, bound)
