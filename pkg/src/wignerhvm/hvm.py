"""Phase-space hidden-variable model for nonnegative Wigner functions.

The hidden-state space is phase space itself: a nonnegative normalized
Wigner grid is the probability measure, a hidden state phi assigns the
value zeta . phi to the observable zeta . R_hat, and polynomials of
commuting observables take the corresponding polynomial of those values,
so functional relations inside a context hold identically.  Negativity
anywhere makes the construction impossible, and build_hvm turns that
into a typed error carrying the witness location.

Sampling treats each grid cell as a uniform box around its node (the
jitter removes grid artifacts from histograms); event probabilities
integrate the same box model exactly instead of sampling it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iter_product

import numpy as np

from .oracle import BinSpec, OutcomeDistribution
from .wigner import WignerGrid, characteristic_at_points
from .weyl import PolynomialObservable

NEGATIVITY_TOL_FACTOR = 1e-9
SAMPLE_CHUNK = 1 << 14


class NegativityError(ValueError):
    """Raised when a Wigner grid is genuinely negative somewhere.

    The minimum and its location are the contextuality witness: no
    phase-space hidden-variable model of this form exists for the state.
    """

    def __init__(self, min_value: float, location: tuple, grid_spec):
        self.min_value = float(min_value)
        self.location = tuple(float(x) for x in location)
        self.grid_spec = grid_spec
        super().__init__(
            f"Wigner function is negative ({min_value:.4e} at "
            f"{self.location}); no nonnegative phase-space model exists")

    def to_dict(self) -> dict:
        return {"min_value": self.min_value,
                "location": list(self.location),
                "grid_spec": self.grid_spec.to_dict()}


@dataclass
class HiddenVariableModel:
    """Probability measure over phase space backed by a Wigner grid."""

    measure: WignerGrid
    renormalization: float = 1.0
    _alias: tuple | None = field(default=None, repr=False)

    @property
    def mode_count(self) -> int:
        return self.measure.spec.mode_count

    def cell_probabilities(self) -> np.ndarray:
        probs = self.measure.values.reshape(-1) * self.measure.cell_volume
        return probs / probs.sum()


def build_hvm(w: WignerGrid) -> HiddenVariableModel:
    """Wigner measure as a hidden-variable model; fails on real negativity.

    Negative cells smaller in magnitude than 1e-9 times the grid maximum
    are floating-point floor and get clamped to zero; anything below that
    raises NegativityError with the witness.
    """
    values = w.values
    vmax = float(np.max(np.abs(values)))
    tol = NEGATIVITY_TOL_FACTOR * vmax
    mn = float(values.min())
    if mn < -tol:
        idx = np.unravel_index(np.argmin(values), values.shape)
        location = tuple(float(w.spec.axis[i]) for i in idx)
        raise NegativityError(mn, location, w.spec)
    clamped = np.clip(values, 0.0, None)
    total = clamped.sum() * w.cell_volume
    if total <= 0:
        raise ValueError("measure has no mass")
    normalized = WignerGrid(w.spec, clamped / total)
    return HiddenVariableModel(normalized, renormalization=float(total))


def _build_alias(probs: np.ndarray):
    """Vose alias table: O(1) categorical draws from the cell distribution."""
    k = probs.size
    scaled = probs * k
    accept = np.zeros(k)
    alias = np.zeros(k, dtype=np.int64)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    for i in large:
        accept[i] = 1.0
    for i in small:
        accept[i] = 1.0
    return accept, alias


def _ensure_alias(model: HiddenVariableModel):
    if model._alias is None:
        model._alias = _build_alias(model.cell_probabilities())
    return model._alias


def _sample_chunk(model: HiddenVariableModel, seed: int, chunk_index: int,
                  count: int) -> np.ndarray:
    accept, alias = _ensure_alias(model)
    spec = model.measure.spec
    n_axes = 2 * spec.mode_count
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, chunk_index])))
    u = rng.random((count, 2 + n_axes))
    cand = np.minimum((u[:, 0] * accept.size).astype(np.int64),
                      accept.size - 1)
    idx = np.where(u[:, 1] < accept[cand], cand, alias[cand])
    coords = np.unravel_index(idx, spec.shape)
    phi = np.empty((count, n_axes))
    for d in range(n_axes):
        phi[:, d] = spec.axis[coords[d]] + (u[:, 2 + d] - 0.5) * spec.step
    return phi


def sample(model: HiddenVariableModel, n: int, seed: int,
           threads: int = 1) -> np.ndarray:
    """n hidden states, shape (n, 2m); row i depends only on (seed, i).

    The stream is chunked with per-chunk substreams derived from
    (seed, chunk index), so any thread count and any chunk-level
    parallelism reproduce the identical array, and prefixes agree between
    runs of different lengths.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    chunks = []
    for c in range(0, (n + SAMPLE_CHUNK - 1) // SAMPLE_CHUNK):
        count = min(SAMPLE_CHUNK, n - c * SAMPLE_CHUNK)
        chunks.append((c, count))
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda cc: _sample_chunk(model, seed, cc[0], cc[1]), chunks))
    else:
        parts = [_sample_chunk(model, seed, c, count) for c, count in chunks]
    return np.concatenate(parts, axis=0)


def value_assignment(phi, obs: PolynomialObservable) -> float:
    """f evaluated at the linear values zeta_i . phi.

    Linear observables get exactly zeta . phi, so additivity in zeta holds
    identically, commuting or not; polynomial observables respect their
    defining functional relation by construction.
    """
    phi = np.asarray(phi, dtype=float).reshape(-1)
    values = [float(gen @ phi) for gen in obs.context.generators]
    return float(obs(*values))


def hvm_homodyne_distribution(model: HiddenVariableModel, zeta,
                              bins: BinSpec, n: int, seed: int,
                              threads: int = 1) -> OutcomeDistribution:
    """Histogram of zeta . phi over n hidden-state samples."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    if not np.any(zeta):
        raise ValueError("observable label must be nonzero")
    phi = sample(model, n, seed, threads=threads)
    outcomes = phi @ zeta
    counts, _ = np.histogram(outcomes, bins=bins.edges)
    return OutcomeDistribution(bins.edges, counts / n)


def _box_cdf(t: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """CDF of a sum of independent centered uniforms with given half-widths."""
    d = widths.size
    total = widths.sum()
    if d == 0:
        return (t >= 0).astype(float)
    tc = np.clip(t, -total, total)
    norm = 1.0
    for w in widths:
        norm *= 2 * w
    acc = np.zeros_like(tc)
    for signs in iter_product((0, 1), repeat=d):
        shift = total - 2 * np.sum(widths[np.array(signs, dtype=bool)])
        term = np.clip(tc + shift, 0.0, None) ** d
        acc += (-1) ** sum(signs) * term
    fact = float(np.prod(np.arange(1, d + 1)))
    cdf = acc / (fact * norm)
    cdf[t <= -total] = 0.0
    cdf[t >= total] = 1.0
    return cdf


def hvm_event_probability(model: HiddenVariableModel, zeta,
                          intervals) -> float:
    """Exact model probability that zeta . phi lands in a union of intervals.

    No sampling: each grid cell contributes its mass times the exact
    probability that the cell's uniform jitter puts the linear outcome
    inside the set (the jitter sum has a piecewise-polynomial CDF).
    """
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    if not np.any(zeta):
        raise ValueError("observable label must be nonzero")
    spec = model.measure.spec
    probs = model.cell_probabilities()
    axis_idx = np.indices(spec.shape).reshape(2 * spec.mode_count, -1)
    centers = spec.axis[axis_idx]
    outcomes = zeta @ centers
    widths = np.abs(zeta) * spec.step / 2
    widths = widths[widths > 0]
    total = 0.0
    for a, b in intervals:
        upper = _box_cdf(np.asarray(b - outcomes), widths)
        lower = _box_cdf(np.asarray(a - outcomes), widths)
        total += float(np.sum(probs * (upper - lower)))
    return total


def empirical_characteristic_check(model: HiddenVariableModel, points,
                                   state, tolerance: float = 2e-3) -> dict:
    """Compare the measure's Fourier transform with the state's chi.

    Integrates exp(i [v, phi]) against the model measure on the grid and
    checks it against Tr[rho D(v)] at each test point; agreement is the
    statistical face of the Fourier-inversion argument linking the two.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    spec = model.measure.spec
    m = spec.mode_count
    probs = model.cell_probabilities()
    axis_idx = np.indices(spec.shape).reshape(2 * m, -1)
    centers = spec.axis[axis_idx]  # (2m, ncells)
    reference = characteristic_at_points(state, pts)
    deviations = []
    for v, ref in zip(pts, reference):
        k = np.concatenate([v[m:], -v[:m]])  # [v, phi] = (omega^T v) . phi
        phase = k @ centers
        value = complex(np.sum(probs * np.exp(1j * phase)))
        deviations.append(abs(value - ref))
    max_dev = float(max(deviations))
    return {
        "points": pts.tolist(),
        "deviations": [float(d) for d in deviations],
        "max_deviation": max_dev,
        "tolerance": tolerance,
        "pass": bool(max_dev <= tolerance),
    }
