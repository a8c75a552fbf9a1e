"""State constructors and Gaussian-sector dynamics.

Conventions: hbar = 1, [q, p] = i, vacuum covariance = I/2, so a coherent
state with amplitude alpha has mean (sqrt(2) Re alpha, sqrt(2) Im alpha).
Gaussian states are kept exactly as (mean, covariance); everything else is
represented on a truncated Fock space, renormalized after truncation with
the leaked weight reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import fockspace
from .phase_space import is_symplectic, omega, williamson

LEAKAGE_LIMIT = 1e-3

GAUSSIAN_KINDS = ("vacuum", "coherent", "squeezed", "thermal")
FOCK_KINDS = ("fock", "cat", "gkp", "photon_subtracted_squeezed")


class StateSpecError(ValueError):
    """Malformed or unsupported state specification."""


class LeakageError(ValueError):
    """Truncation removed more weight than the tolerance allows."""

    def __init__(self, leakage, cutoff):
        self.leakage = leakage
        self.cutoff = cutoff
        super().__init__(
            f"truncation leakage {leakage:.3e} exceeds {LEAKAGE_LIMIT:.0e} "
            f"at cutoff {cutoff}; increase the cutoff")


@dataclass
class GaussianState:
    """Mean vector and covariance matrix in (q-block, p-block) ordering."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.covariance = np.asarray(self.covariance, dtype=float)
        n = self.mean.size
        if n % 2 != 0 or self.covariance.shape != (n, n):
            raise ValueError("mean/covariance dimensions inconsistent")
        if np.max(np.abs(self.covariance - self.covariance.T)) > 1e-12:
            raise ValueError("covariance is not symmetric")
        heis = self.covariance + 0.5j * omega(n // 2)
        if np.min(np.linalg.eigvalsh(heis)) < -1e-10:
            raise ValueError("covariance violates the uncertainty relation")

    @property
    def mode_count(self) -> int:
        return self.mean.size // 2

    def purity(self) -> float:
        return float(1.0 / np.sqrt(np.linalg.det(2 * self.covariance)))


@dataclass
class FockDensityOperator:
    """Density matrix on the truncated multimode Fock basis."""

    matrix: np.ndarray
    cutoff: int
    mode_count: int
    leakage: float = 0.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.cutoff ** self.mode_count
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"cutoff^modes = {dim}")
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        tr = float(np.trace(self.matrix).real)
        if abs(tr - 1.0) > 1e-6:
            raise ValueError(f"trace {tr} deviates from 1 beyond tolerance")
        if np.min(np.linalg.eigvalsh(self.matrix)) < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.cutoff ** self.mode_count

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass
class GaussianChannel:
    """Gaussian CPTP map acting as mean -> X mean + d, cov -> X cov X^T + Y."""

    X: np.ndarray
    Y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        self.d = np.asarray(self.d, dtype=float).reshape(-1)
        n = self.d.size
        if self.X.shape != (n, n) or self.Y.shape != (n, n) or n % 2 != 0:
            raise ValueError("channel dimensions inconsistent")
        if np.max(np.abs(self.Y - self.Y.T)) > 1e-12:
            raise ValueError("Y is not symmetric")
        w = omega(n // 2)
        cp = self.Y + 0.5j * (w - self.X @ w @ self.X.T)
        if np.min(np.linalg.eigvalsh(cp)) < -1e-10:
            raise ValueError("channel violates complete positivity")

    @property
    def mode_count(self) -> int:
        return self.d.size // 2


@dataclass(frozen=True)
class StateSpec:
    """Declarative state description: kind + parameters (+ modes, cutoff)."""

    kind: str
    params: dict = field(default_factory=dict)
    modes: int = 1
    cutoff: int | None = None

    @staticmethod
    def from_json(text_or_dict) -> "StateSpec":
        if isinstance(text_or_dict, str):
            try:
                raw = json.loads(text_or_dict)
            except json.JSONDecodeError as exc:
                raise StateSpecError(f"invalid state JSON: {exc}") from exc
        else:
            raw = text_or_dict
        if not isinstance(raw, dict) or "kind" not in raw:
            raise StateSpecError("state spec must be an object with a 'kind'")
        known = {"kind", "params", "modes", "cutoff"}
        extra = set(raw) - known
        if extra:
            raise StateSpecError(f"unknown state spec fields: {sorted(extra)}")
        return StateSpec(
            kind=str(raw["kind"]),
            params=dict(raw.get("params", {})),
            modes=int(raw.get("modes", 1)),
            cutoff=None if raw.get("cutoff") is None else int(raw["cutoff"]),
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params),
                "modes": self.modes, "cutoff": self.cutoff}


def _as_complex(value, name: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise StateSpecError(f"parameter '{name}' must be a number or [re, im]")


def _renormalized(matrix: np.ndarray, cutoff: int, mode_count: int,
                  weight: float) -> FockDensityOperator:
    """Package a truncated matrix; weight is the trace before truncation."""
    tr = float(np.trace(matrix).real)
    leakage = float(max(weight - tr, 0.0))
    if leakage > LEAKAGE_LIMIT:
        raise LeakageError(leakage, cutoff)
    matrix = (matrix + matrix.conj().T) / 2
    return FockDensityOperator(matrix / tr, cutoff, mode_count, leakage)


def _pure_from_coefficients(coeffs: np.ndarray, cutoff: int) -> FockDensityOperator:
    norm = float(np.sum(np.abs(coeffs) ** 2))
    rho = np.outer(coeffs, coeffs.conj())
    return _renormalized(rho, cutoff, 1, weight=1.0)


def vacuum_state(modes: int = 1) -> GaussianState:
    return GaussianState(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))


def coherent_state(alpha, modes: int = 1) -> GaussianState:
    alphas = np.atleast_1d(np.asarray(alpha))
    if alphas.size != modes:
        raise StateSpecError("one amplitude per mode required")
    mean = np.concatenate([np.sqrt(2) * alphas.real, np.sqrt(2) * alphas.imag])
    return GaussianState(mean.astype(float), 0.5 * np.eye(2 * modes))


def squeezed_state(r: float, theta: float = 0.0) -> GaussianState:
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ rot.T / 2
    return GaussianState(np.zeros(2), cov)


def thermal_state(nbar: float, modes: int = 1) -> GaussianState:
    if nbar < 0:
        raise StateSpecError("mean photon number must be nonnegative")
    return GaussianState(np.zeros(2 * modes), (nbar + 0.5) * np.eye(2 * modes))


def fock_state(n: int, cutoff: int) -> FockDensityOperator:
    if cutoff < n + 2:
        raise StateSpecError(f"cutoff {cutoff} too small for fock({n})")
    coeffs = np.zeros(cutoff, dtype=complex)
    coeffs[n] = 1.0
    return _pure_from_coefficients(coeffs, cutoff)


def cat_state(alpha, cutoff: int) -> FockDensityOperator:
    """Even cat state, coefficients prop. to (alpha^n + (-alpha)^n)/sqrt(n!)."""
    alpha = _as_complex(alpha, "alpha")
    n = np.arange(cutoff)
    log_fact = gammaln(n + 1)
    amps = (alpha ** n + (-alpha) ** n) * np.exp(-0.5 * log_fact)
    x = abs(alpha) ** 2
    # exact norm of the untruncated coefficient sequence
    norm = np.sqrt(4 * np.cosh(x) * np.exp(-x)) * np.exp(x / 2)
    coeffs = amps / norm
    weight = float(np.sum(np.abs(coeffs) ** 2))
    rho = np.outer(coeffs, coeffs.conj())
    leak = 1.0 - weight
    if leak > LEAKAGE_LIMIT:
        raise LeakageError(leak, cutoff)
    out = FockDensityOperator(rho / weight, cutoff, 1, float(max(leak, 0.0)))
    return out


def gkp_state(delta: float, cutoff: int) -> FockDensityOperator:
    """Square-lattice grid state with Gaussian peaks and envelope width delta.

    psi(q) = sum_s exp(-delta^2 (2 s sqrt(pi))^2 / 2)
                   * exp(-(q - 2 s sqrt(pi))^2 / (2 delta^2)),
    expanded over the oscillator eigenbasis by quadrature.
    """
    if delta <= 0:
        raise StateSpecError("peak width must be positive")
    spacing = 2 * np.sqrt(np.pi)
    s_max = int(np.ceil(np.sqrt(45.0) / (delta * spacing))) + 1
    q_max = s_max * spacing + 10 * delta
    axis = np.linspace(-q_max, q_max, 8192)
    psi = np.zeros_like(axis)
    for s in range(-s_max, s_max + 1):
        mu = s * spacing
        psi += np.exp(-0.5 * (delta * mu) ** 2) * np.exp(
            -((axis - mu) ** 2) / (2 * delta ** 2))
    psi /= np.sqrt(np.trapezoid(psi ** 2, axis))
    basis = fockspace.hermite_functions(cutoff - 1, axis)
    coeffs = np.trapezoid(basis * psi[None, :], axis, axis=1)
    weight = float(np.sum(coeffs ** 2))
    leak = 1.0 - weight
    if leak > LEAKAGE_LIMIT:
        raise LeakageError(leak, cutoff)
    rho = np.outer(coeffs, coeffs)
    return FockDensityOperator(rho / weight, cutoff, 1, float(max(leak, 0.0)))


def photon_subtracted_squeezed_state(r: float, cutoff: int) -> FockDensityOperator:
    """a S(r)|0>, proportional to the squeezed single photon S(r)|1>."""
    if r == 0:
        raise StateSpecError("photon subtraction needs nonzero squeezing")
    sq = fockspace.squeeze_matrix(r, cutoff)
    coeffs = sq[:, 1]
    weight = float(np.sum(np.abs(coeffs) ** 2))
    leak = 1.0 - weight
    if leak > LEAKAGE_LIMIT:
        raise LeakageError(leak, cutoff)
    rho = np.outer(coeffs, coeffs.conj())
    return FockDensityOperator(rho / weight, cutoff, 1, float(max(leak, 0.0)))


def make_state(spec: StateSpec):
    """Build the state for a spec: Gaussian kinds exactly, the rest on Fock."""
    kind = spec.kind
    params = spec.params
    cutoff = spec.cutoff if spec.cutoff is not None else 30
    if kind not in GAUSSIAN_KINDS + FOCK_KINDS:
        raise StateSpecError(f"unknown state kind '{kind}'")
    if kind in FOCK_KINDS and cutoff < 2:
        raise StateSpecError("cutoff must be at least 2")
    if kind in FOCK_KINDS and spec.modes != 1:
        raise StateSpecError(f"'{kind}' is a single-mode state")
    try:
        if kind == "vacuum":
            return vacuum_state(spec.modes)
        if kind == "coherent":
            alpha = params.get("alpha", 1.0)
            if isinstance(alpha, (list, tuple)) and spec.modes > 1:
                alphas = [_as_complex(a, "alpha") for a in alpha]
            else:
                alphas = [_as_complex(alpha, "alpha")] * spec.modes
            return coherent_state(np.array(alphas), spec.modes)
        if kind == "squeezed":
            if spec.modes != 1:
                raise StateSpecError("'squeezed' is a single-mode state")
            return squeezed_state(float(params.get("r", 0.5)),
                                  float(params.get("theta", 0.0)))
        if kind == "thermal":
            return thermal_state(float(params.get("nbar", 1.0)), spec.modes)
        if kind == "fock":
            return fock_state(int(params.get("n", 1)), cutoff)
        if kind == "cat":
            return cat_state(params.get("alpha", 2.0), cutoff)
        if kind == "gkp":
            return gkp_state(float(params.get("delta", 0.3)), cutoff)
        return photon_subtracted_squeezed_state(
            float(params.get("r", 0.5)), cutoff)
    except (TypeError, KeyError) as exc:
        raise StateSpecError(f"bad parameters for '{kind}': {exc}") from exc


def apply_gaussian_unitary(state: GaussianState, S: np.ndarray,
                           d=None) -> GaussianState:
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S):
        raise ValueError("transformation matrix is not symplectic")
    if d is None:
        d = np.zeros(S.shape[0])
    d = np.asarray(d, dtype=float).reshape(-1)
    return GaussianState(S @ state.mean + d, S @ state.covariance @ S.T)


def apply_gaussian_channel(state: GaussianState,
                           channel: GaussianChannel) -> GaussianState:
    if channel.mode_count != state.mode_count:
        raise ValueError("channel/state mode mismatch")
    mean = channel.X @ state.mean + channel.d
    cov = channel.X @ state.covariance @ channel.X.T + channel.Y
    return GaussianState(mean, cov)


def compose_channels(first: GaussianChannel,
                     second: GaussianChannel) -> GaussianChannel:
    """Channel equal to applying `first` then `second`."""
    if first.mode_count != second.mode_count:
        raise ValueError("channel dimension mismatch")
    X = second.X @ first.X
    Y = second.X @ first.Y @ second.X.T + second.Y
    d = second.X @ first.d + second.d
    return GaussianChannel(X, Y, d)


def identity_channel(modes: int = 1) -> GaussianChannel:
    n = 2 * modes
    return GaussianChannel(np.eye(n), np.zeros((n, n)), np.zeros(n))


def loss_channel(eta: float, modes: int = 1) -> GaussianChannel:
    """Pure loss with transmissivity eta; the vacuum is its fixed point."""
    if not 0 < eta <= 1:
        raise ValueError("transmissivity must be in (0, 1]")
    n = 2 * modes
    return GaussianChannel(np.sqrt(eta) * np.eye(n),
                           (1 - eta) / 2 * np.eye(n), np.zeros(n))


def _thermal_diagonal(nbar: float, cutoff: int) -> np.ndarray:
    if nbar <= 1e-12:
        d = np.zeros(cutoff)
        d[0] = 1.0
        return d
    n = np.arange(cutoff)
    return (nbar / (nbar + 1)) ** n / (nbar + 1)


def gaussian_to_fock(state: GaussianState, cutoff: int) -> FockDensityOperator:
    """Truncated-Fock representation of a Gaussian state.

    Williamson-decomposes the covariance into a thermal core and a
    symplectic transformation, applies the matching metaplectic unitary and
    an exact displacement on the truncated space, then renormalizes.
    """
    m = state.mode_count
    if m > 2:
        raise ValueError("dense Fock representation supported for m <= 2")
    S, nu = williamson(state.covariance)
    nbars = np.clip(nu - 0.5, 0.0, None)
    diag = np.array([1.0])
    for nb in nbars:
        diag = np.kron(diag, _thermal_diagonal(nb, cutoff))
    rho = np.diag(diag).astype(complex)
    if np.max(np.abs(S - np.eye(2 * m))) > 1e-12:
        M = fockspace.metaplectic_operator(S, cutoff)
        rho = M @ rho @ M.conj().T
    if np.max(np.abs(state.mean)) > 1e-14:
        D = fockspace.multimode_displacement(state.mean, cutoff)
        rho = D @ rho @ D.conj().T
    return _renormalized(rho, cutoff, m, weight=1.0)
