"""Canonical phase-space core: layouts, quadratic Hamiltonians, Gaussian states.

Conventions (natural units, hbar = k_B = 1):
  * coordinates stacked as z = (x_1..x_n, p_1..p_n);
  * H = 1/2 z^T h z + c^T z with h real symmetric;
  * covariance sigma_ij = 1/2 <{dz_i, dz_j}>, vacuum sigma = I/2 at m = omega = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

# Pure-state determinant floor: det(2 sigma) >= 1, degeneracy below this is an
# invalid construction, not something to regularize.
_DET_FLOOR = 1e-12
_LOG_OVERLAP_FLOOR = np.log(1e-300)


class PhaseSpaceError(ValueError):
    """Invalid phase-space object or operation."""


@dataclass(frozen=True)
class PhaseSpaceLayout:
    """Ordered mode labels fixing the (x-block, p-block) coordinate layout."""

    mode_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.mode_labels) == 0:
            raise PhaseSpaceError("layout needs at least one mode")
        if len(set(self.mode_labels)) != len(self.mode_labels):
            raise PhaseSpaceError("mode labels must be unique")

    @property
    def n_modes(self) -> int:
        return len(self.mode_labels)

    @property
    def dim(self) -> int:
        return 2 * len(self.mode_labels)

    def index(self, label: str) -> int:
        try:
            return self.mode_labels.index(label)
        except ValueError:
            raise PhaseSpaceError(f"unknown mode label {label!r}") from None

    def z_indices(self, labels: Sequence[str]) -> NDArray[np.intp]:
        """Phase-space indices (x rows then p rows) of the selected modes."""
        k = np.array([self.index(lb) for lb in labels], dtype=np.intp)
        return np.concatenate([k, k + self.n_modes])


def layout(*labels: str) -> PhaseSpaceLayout:
    return PhaseSpaceLayout(tuple(labels))


def symplectic_form(n_modes: int) -> FloatArray:
    """J = [[0, I], [-I, 0]] for the (x, p) block ordering."""
    if n_modes < 1:
        raise PhaseSpaceError("need at least one mode")
    J = np.zeros((2 * n_modes, 2 * n_modes))
    J[:n_modes, n_modes:] = np.eye(n_modes)
    J[n_modes:, :n_modes] = -np.eye(n_modes)
    return J


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """H = 1/2 z^T h z + linear^T z on a fixed layout."""

    layout: PhaseSpaceLayout
    h: FloatArray
    linear: FloatArray = field(default=None)  # type: ignore[assignment]
    tag: str = ""

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.layout.dim, self.layout.dim):
            raise PhaseSpaceError("h matrix shape does not match layout")
        scale = max(np.abs(h).max(), 1.0)
        if np.abs(h - h.T).max() > 1e-12 * scale:
            raise PhaseSpaceError("h matrix must be symmetric")
        object.__setattr__(self, "h", 0.5 * (h + h.T))
        lin = self.linear
        lin = np.zeros(self.layout.dim) if lin is None else np.asarray(lin, float)
        if lin.shape != (self.layout.dim,):
            raise PhaseSpaceError("linear term shape does not match layout")
        object.__setattr__(self, "linear", lin)
        n = self.layout.n_modes
        pp = self.h[n:, n:]
        if np.linalg.eigvalsh(pp).min() <= 0:
            raise PhaseSpaceError("momentum block must be positive definite")

    @property
    def n_modes(self) -> int:
        return self.layout.n_modes

    def energy_at(self, z: FloatArray) -> float:
        """Classical energy functional at the phase-space point z."""
        z = np.asarray(z, float)
        return float(0.5 * z @ self.h @ z + self.linear @ z)


@dataclass(frozen=True)
class GaussianState:
    """First moments + covariance; carrier of every state in the library."""

    layout: PhaseSpaceLayout
    mean: FloatArray
    cov: FloatArray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        d = self.layout.dim
        if mean.shape != (d,) or cov.shape != (d, d):
            raise PhaseSpaceError("mean/covariance shape does not match layout")
        if np.abs(cov - cov.T).max() > 1e-10 * max(np.abs(cov).max(), 1.0):
            raise PhaseSpaceError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        J = symplectic_form(self.layout.n_modes)
        # uncertainty relation sigma + iJ/2 >= 0
        ev = np.linalg.eigvalsh(cov + 0.5j * J)
        if ev.min() < -1e-10:
            raise PhaseSpaceError(
                f"covariance violates the uncertainty relation (min eig {ev.min():.3e})")

    @property
    def n_modes(self) -> int:
        return self.layout.n_modes


@dataclass(frozen=True)
class CoherentAmplitude:
    """Displacement (x0, p0) of one mode."""

    mode: str
    x0: float
    p0: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.x0) and np.isfinite(self.p0)):
            raise PhaseSpaceError("amplitudes must be finite")


def vacuum_cov(masses: Sequence[float], freqs: Sequence[float]) -> FloatArray:
    """Ground-state covariance diag(1/(2 m w), m w / 2) per mode."""
    m = np.asarray(masses, float)
    w = np.asarray(freqs, float)
    if np.any(m <= 0) or np.any(w <= 0):
        raise PhaseSpaceError("masses and frequencies must be positive")
    return np.diag(np.concatenate([1.0 / (2 * m * w), m * w / 2]))


def coherent_state(lay: PhaseSpaceLayout,
                   masses: Sequence[float],
                   freqs: Sequence[float],
                   amplitudes: Sequence[CoherentAmplitude] = ()) -> GaussianState:
    """Displaced-vacuum product state; modes without an amplitude stay at rest."""
    mean = np.zeros(lay.dim)
    for amp in amplitudes:
        k = lay.index(amp.mode)
        mean[k] = amp.x0
        mean[k + lay.n_modes] = amp.p0
    return GaussianState(lay, mean, vacuum_cov(masses, freqs))


def thermal_occupation(freq: float, temperature: float) -> float:
    """Bose occupation nbar = 1/(e^{w/T} - 1), 0 at T = 0."""
    if temperature <= 0:
        return 0.0
    r = freq / temperature
    if r > 700:
        return 0.0
    return 1.0 / np.expm1(r)


def thermal_state(lay: PhaseSpaceLayout,
                  masses: Sequence[float],
                  freqs: Sequence[float],
                  temperature: float | Sequence[float]) -> GaussianState:
    """Zero-mean Gibbs state, per-mode covariance (nbar + 1/2) scaled by (m w)."""
    m = np.asarray(masses, float)
    w = np.asarray(freqs, float)
    if np.any(m <= 0) or np.any(w <= 0):
        raise PhaseSpaceError("masses and frequencies must be positive")
    temps = np.broadcast_to(np.asarray(temperature, float), w.shape)
    nbar = np.array([thermal_occupation(wi, ti) for wi, ti in zip(w, temps)])
    cov = np.diag(np.concatenate([(nbar + 0.5) / (m * w), (nbar + 0.5) * m * w]))
    return GaussianState(lay, np.zeros(lay.dim), cov)


def log_purity(state: GaussianState) -> float:
    """ln tr rho^2; stays finite where purity itself underflows."""
    sign, logdet = np.linalg.slogdet(2.0 * state.cov)
    if sign <= 0 or logdet < np.log(1.0 - _DET_FLOOR) - 1e-9:
        raise PhaseSpaceError("degenerate covariance: invalid state construction")
    return float(-0.5 * logdet)


def purity(state: GaussianState) -> float:
    """tr rho^2 = 1 / (2^n sqrt(det sigma))."""
    return float(np.exp(log_purity(state)))


def reduce_state(state: GaussianState, modes: Sequence[str]) -> GaussianState:
    """Marginal on the selected modes (tracing out the rest is basis-free)."""
    if len(modes) == 0:
        raise PhaseSpaceError("cannot reduce to an empty mode set")
    idx = state.layout.z_indices(modes)
    return GaussianState(PhaseSpaceLayout(tuple(modes)),
                         state.mean[idx], state.cov[np.ix_(idx, idx)])


def log_negativity(state: GaussianState, part_a: Sequence[str],
                   part_b: Sequence[str]) -> float:
    """Gaussian logarithmic negativity across the (A, B) bipartition.

    Partial transposition flips the momentum signs of the B modes; the result
    is sum over symplectic eigenvalues nu of max(0, -ln 2 nu).
    """
    lay = state.layout
    if sorted(tuple(part_a) + tuple(part_b)) != sorted(lay.mode_labels):
        raise PhaseSpaceError("bipartition must cover all modes exactly once")
    n = lay.n_modes
    flip = np.ones(2 * n)
    for lb in part_b:
        flip[lay.index(lb) + n] = -1.0
    cov_pt = state.cov * np.outer(flip, flip)
    ev = np.linalg.eigvals(symplectic_form(n) @ cov_pt)
    nu = np.sort(np.abs(ev))[::2]  # eigenvalues come in +-i nu pairs
    return float(np.sum(np.maximum(0.0, -np.log(2.0 * nu))))


def log_gaussian_overlap(a: GaussianState, b: GaussianState) -> float:
    """ln of the normalized Hilbert-Schmidt overlap tr(ra rb)/sqrt(tr ra^2 tr rb^2).

    ln Ov = -1/2 d^T (sa+sb)^-1 d + 1/4 ln det(2 sa) + 1/4 ln det(2 sb)
            - 1/2 ln det(sa+sb);
    for equal covariances this reduces to -1/4 d^T sigma^-1 d.  Evaluated in
    log space so long-time values stay finite.
    """
    if a.layout != b.layout:
        raise PhaseSpaceError("overlap requires matching layouts")
    d = a.mean - b.mean
    ssum = a.cov + b.cov
    quad = 0.5 * d @ np.linalg.solve(ssum, d)
    sa, la = np.linalg.slogdet(2.0 * a.cov)
    sb, lb = np.linalg.slogdet(2.0 * b.cov)
    ss, ls = np.linalg.slogdet(ssum)
    if min(sa, sb, ss) <= 0:
        raise PhaseSpaceError("degenerate covariance in overlap")
    return float(-quad + 0.25 * (la + lb) - 0.5 * ls)


def gaussian_overlap(a: GaussianState, b: GaussianState) -> float:
    """Normalized Hilbert-Schmidt overlap in (0, 1], clamped at 1e-300."""
    return float(np.exp(max(log_gaussian_overlap(a, b), _LOG_OVERLAP_FLOOR)))
