"""Decoherence metrics per decomposition: the decoherence function Gamma(t),
fitted Lambda(t), decoherence times, pointer robustness, and the parallel
S-vs-CM comparison.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decomposition import (LinearCoordinateTransform, cm_relative_transform,
                            many_mode_constants, normal_mode_transform,
                            transform_hamiltonian, transform_state)
from .dynamics import (BranchPair, DynamicsError, evolve_branches_from,
                       propagator)
from .models import BathParams, SystemPotential, build_caldeira_leggett
from .phase_space import (CoherentAmplitude, FloatArray, GaussianState,
                          PhaseSpaceLayout, QuadraticHamiltonian,
                          log_gaussian_overlap, purity, reduce_state,
                          thermal_state, vacuum_cov)

# ln of the overlap floor: astronomically negative Gamma is clamped, flagged
_GAMMA_FLOOR = float(np.log(1e-300))
_TAU_THRESHOLD = -1.0  # overlap fallen to 1/e


class MetricsError(ValueError):
    """Invalid decoherence-metric request."""


@dataclass(frozen=True)
class DecoherenceReport:
    """Gamma/Lambda samples and the decoherence time for one decomposition."""

    decomposition: str
    t_grid: FloatArray
    gamma: FloatArray
    lambda_fit: FloatArray
    tau_dec: float | None
    alpha: CoherentAmplitude
    beta: CoherentAmplitude
    saturated: np.ndarray
    fingerprint: str


def model_fingerprint(H: QuadraticHamiltonian) -> str:
    digest = hashlib.sha256(np.ascontiguousarray(H.h).tobytes()).hexdigest()[:12]
    return f"{H.tag or 'quadratic'}/{H.n_modes}m/{digest}"


def decoherence_function(branches: Sequence[BranchPair],
                         env_modes: Sequence[str]) -> FloatArray:
    """Gamma(t) = ln overlap of the two branches' environment marginals.

    Branch covariances are identical by construction, so the overlap exponent
    is the pure quadratic form -1/4 d^T sigma^-1 d, which scales exactly with
    the squared amplitude separation.
    """
    out = np.empty(len(branches))
    for i, bp in enumerate(branches):
        ea = reduce_state(bp.branch_a, env_modes)
        eb = reduce_state(bp.branch_b, env_modes)
        if ea.cov is eb.cov or np.array_equal(ea.cov, eb.cov):
            d = ea.mean - eb.mean
            g = -0.25 * float(d @ np.linalg.solve(ea.cov, d))
        else:
            g = log_gaussian_overlap(ea, eb)
        out[i] = max(g, _GAMMA_FLOOR)
    return out


def saturation_flags(gamma: FloatArray) -> np.ndarray:
    return gamma <= _GAMMA_FLOOR


def amplitude_distance_sq(alpha: CoherentAmplitude, beta: CoherentAmplitude,
                          open_scale: tuple[float, float]) -> float:
    """|alpha - beta|^2 in vacuum-scaled coordinates (x sqrt(mw), p/sqrt(mw))."""
    m, w = open_scale
    dx = alpha.x0 - beta.x0
    dp = alpha.p0 - beta.p0
    return m * w * dx * dx + dp * dp / (m * w)


def fit_lambda(gamma: FloatArray, alpha: CoherentAmplitude,
               beta: CoherentAmplitude,
               open_scale: tuple[float, float]) -> FloatArray:
    """Lambda(t) = -2 Gamma(t) / |alpha - beta|^2."""
    d2 = amplitude_distance_sq(alpha, beta, open_scale)
    if d2 == 0.0:
        raise MetricsError("Lambda undefined for alpha = beta")
    return -2.0 * gamma / d2


def decoherence_time(t_grid: Sequence[float], gamma: FloatArray) -> float | None:
    """First crossing of Gamma <= -1 (1/e overlap), linearly interpolated;
    None when the threshold is not reached on the grid."""
    t = np.asarray(t_grid, float)
    for i in range(1, len(t)):
        if gamma[i] <= _TAU_THRESHOLD:
            g0, g1 = gamma[i - 1], gamma[i]
            if g1 == g0:
                return float(t[i])
            frac = (_TAU_THRESHOLD - g0) / (g1 - g0)
            return float(t[i - 1] + frac * (t[i] - t[i - 1]))
    return None


def build_report(decomposition: str, branches: Sequence[BranchPair],
                 env_modes: Sequence[str], open_scale: tuple[float, float],
                 H: QuadraticHamiltonian) -> DecoherenceReport:
    t_grid = np.array([bp.t for bp in branches])
    gamma = decoherence_function(branches, env_modes)
    alpha, beta = branches[0].alpha, branches[0].beta
    lam = fit_lambda(gamma, alpha, beta, open_scale) \
        if (alpha.x0, alpha.p0) != (beta.x0, beta.p0) else np.zeros_like(gamma)
    return DecoherenceReport(decomposition, t_grid, gamma, lam,
                             decoherence_time(t_grid, gamma), alpha, beta,
                             saturation_flags(gamma), model_fingerprint(H))


@dataclass(frozen=True)
class ParallelComparison:
    """Both decompositions' reports plus the decoherence-time ratio summary."""

    report_s: DecoherenceReport
    report_cm: DecoherenceReport
    tau_ratio: float | None
    ratio_flag: str          # "within" | "outside" | "undefined"
    frame_residual: float
    positivity_ok: bool


def _ratio_summary(tau_s: float | None, tau_cm: float | None) -> tuple[float | None, str]:
    if tau_s is None or tau_cm is None or tau_cm == 0:
        return None, "undefined"
    r = tau_s / tau_cm
    return r, "within" if 0.1 <= r <= 10.0 else "outside"


def parallel_compare(pot: SystemPotential, bath: BathParams,
                     pair_s: tuple[CoherentAmplitude, CoherentAmplitude],
                     pair_cm: tuple[CoherentAmplitude, CoherentAmplitude],
                     temperature: float, t_grid: Sequence[float],
                     open_freq_ref: float = 1.0,
                     allow_positivity_violation: bool = False,
                     workers: int = 1) -> ParallelComparison:
    """Run the S+E and CM+R decoherence pipelines off the same global unitary.

    The S+E pipeline evolves directly under the chain Hamiltonian; the CM+R
    pipeline evolves the same global initial state re-expressed through the
    CM/relative transform followed by environment normal-mode linearization.
    Each pipeline displaces its own open mode by its own amplitude pair (the
    amplitude freedom is part of the comparison's definition).
    """
    H = build_caldeira_leggett(pot, bath)
    lay = H.layout
    n = lay.n_modes
    w_s = pot.omega_s if pot.variant == "harmonic" else open_freq_ref
    env_labels = lay.mode_labels[1:]

    consts = many_mode_constants(pot, bath)
    if not consts.positivity_ok and not allow_positivity_violation:
        raise MetricsError(
            "transformed constants violate confinement positivity; "
            "pass allow_positivity_violation=True to proceed")

    env = thermal_state(PhaseSpaceLayout(env_labels), bath.masses, bath.freqs,
                        temperature)
    base = _product_base(lay, "S", (pot.m_s, w_s), env)

    masses = np.concatenate([[pot.m_s], bath.masses])
    cm_labels = ("CM",) + tuple(f"R{a}" for a in range(1, n))
    T1 = cm_relative_transform(masses, labels=cm_labels, source=lay)
    H1 = transform_hamiltonian(H, T1)
    T2, H2 = normal_mode_transform(H1, cm_labels[1:])
    base_cm = transform_state(transform_state(base, T1), T2)
    omega_cm = float(np.sqrt(consts.m_omega_cm_sq / consts.total_mass)) \
        if consts.m_omega_cm_sq > 0 else open_freq_ref

    def run_s() -> DecoherenceReport:
        branches = evolve_branches_from(base, pair_s[0], pair_s[1], H, t_grid)
        return build_report("S+E", branches, env_labels, (pot.m_s, w_s), H)

    def run_cm() -> DecoherenceReport:
        branches = evolve_branches_from(base_cm, pair_cm[0], pair_cm[1], H2, t_grid)
        return build_report("CM+R", branches, cm_labels[1:],
                            (consts.total_mass, omega_cm), H2)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fs, fcm = pool.submit(run_s), pool.submit(run_cm)
            report_s, report_cm = fs.result(), fcm.result()
    else:
        report_s, report_cm = run_s(), run_cm()

    S_tot = T2.S @ T1.S
    S_inv = np.linalg.inv(S_tot)
    residual = 0.0
    for t in _residual_probe_times(t_grid):
        M1 = propagator(H, t).M
        M2 = propagator(H2, t).M
        residual = max(residual, float(np.abs(M2 - S_tot @ M1 @ S_inv).max()))

    ratio, flag = _ratio_summary(report_s.tau_dec, report_cm.tau_dec)
    return ParallelComparison(report_s, report_cm, ratio, flag, residual,
                              consts.positivity_ok)


def _product_base(lay: PhaseSpaceLayout, open_mode: str,
                  open_scale: tuple[float, float],
                  env: GaussianState) -> GaussianState:
    n = lay.n_modes
    k = lay.index(open_mode)
    m0, w0 = open_scale
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    cov[k, k] = 1.0 / (2 * m0 * w0)
    cov[k + n, k + n] = m0 * w0 / 2
    env_idx = lay.z_indices([lb for lb in lay.mode_labels if lb != open_mode])
    mean[env_idx] = env.mean
    cov[np.ix_(env_idx, env_idx)] = env.cov
    return GaussianState(lay, mean, cov)


def _residual_probe_times(t_grid: Sequence[float]) -> list[float]:
    """Nonzero probe times spanning the grid: endpoints plus midpoint."""
    ts = sorted(float(t) for t in t_grid if t > 0)
    if not ts:
        return []
    probes = {ts[0], ts[len(ts) // 2], ts[-1]}
    return sorted(probes)


def pointer_robustness(H: QuadraticHamiltonian, open_mode: str,
                       candidates: Sequence[tuple[str, GaussianState]],
                       env: GaussianState, t: float) -> list[tuple[str, float]]:
    """Rank single-mode candidate states by open-mode purity retained at t."""
    lay = H.layout
    n = lay.n_modes
    k = lay.index(open_mode)
    env_labels = [lb for lb in lay.mode_labels if lb != open_mode]
    P = propagator(H, t)
    ranking = []
    for label, cand in candidates:
        if cand.layout.n_modes != 1:
            raise MetricsError("pointer candidates live on the open mode only")
        mean = np.zeros(2 * n)
        cov = np.zeros((2 * n, 2 * n))
        mean[k], mean[k + n] = cand.mean[0], cand.mean[1]
        cov[k, k], cov[k + n, k + n] = cand.cov[0, 0], cand.cov[1, 1]
        cov[k, k + n] = cov[k + n, k] = cand.cov[0, 1]
        env_idx = lay.z_indices(env_labels)
        mean[env_idx] = env.mean
        cov[np.ix_(env_idx, env_idx)] = env.cov
        evolved = P.apply(GaussianState(lay, mean, cov))
        ranking.append((label, purity(reduce_state(evolved, [open_mode]))))
    ranking.sort(key=lambda kv: -kv[1])
    return ranking
