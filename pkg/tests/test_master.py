"""Dephasing master equation: operators, integration control, visibility."""
import numpy as np
import pytest

from oscidec import (MasterEqError, MasterEqScenario, backend_name,
                     coherence_profile, evolve_master, position_kernel)
from oscidec.fock import coherent_vector
from oscidec.master import scenario_operators


def _cat_density(d: int, x0: float) -> np.ndarray:
    v = coherent_vector(d, 1.0, 1.0, x0) + coherent_vector(d, 1.0, 1.0, -x0)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_scenario_validation():
    with pytest.raises(MasterEqError, match="variant"):
        MasterEqScenario("quartic", 0.1, 8, 0.01)
    with pytest.raises(MasterEqError, match="non-negative"):
        MasterEqScenario("none", -0.1, 8, 0.01)
    with pytest.raises(MasterEqError, match="cutoff"):
        MasterEqScenario("none", 0.1, 1, 0.01)
    with pytest.raises(MasterEqError, match="step"):
        MasterEqScenario("none", 0.1, 8, 0.0)
    with pytest.raises(MasterEqError, match="scaling"):
        MasterEqScenario("none", 0.1, 8, 0.01, mass=-1.0)
    with pytest.raises(MasterEqError, match="omega"):
        MasterEqScenario("harmonic", 0.1, 8, 0.01, omega=0.0)


def test_scenario_operators_variants():
    scn = MasterEqScenario("none", 0.2, 10, 0.01)
    x, H = scenario_operators(scn)
    assert np.abs(H).max() == 0.0
    assert x[0, 1] == pytest.approx(1 / np.sqrt(2))
    _, Hf = scenario_operators(MasterEqScenario("free", 0.2, 10, 0.01))
    assert Hf[0, 0] == pytest.approx(0.25)      # <0| p^2/2m |0> = w_basis/4
    # matched basis diagonalizes the harmonic variant below the truncation row
    _, Hh = scenario_operators(MasterEqScenario("harmonic", 0.2, 10, 0.01,
                                                omega=1.0, basis_freq=1.0))
    want = np.diag(np.arange(10) + 0.5)
    assert np.abs(Hh[:9, :9] - want[:9, :9]).max() < 1e-12


def test_free_hamiltonian_off_diagonal_decay_law():
    lam, x0, t_end = 0.4, 1.0, 0.25
    scn = MasterEqScenario("none", lam, 24, t_end / 50)
    res = evolve_master(_cat_density(24, x0), scn, [0.0, t_end])
    xs = np.linspace(-2.5, 2.5, 41)
    R0 = position_kernel(res.states[0], xs, 1.0, 1.0)
    Rt = position_kernel(res.states[1], xs, 1.0, 1.0)
    dx2 = (xs[:, None] - xs[None, :]) ** 2
    mask = np.abs(R0) > 1e-3 * np.abs(R0).max()
    ratio = np.abs(Rt[mask]) / np.abs(R0[mask])
    law = np.exp(-lam * dx2[mask] * t_end)
    assert np.abs(ratio - law).max() < 1e-4


def test_evolve_master_clean_run():
    scn = MasterEqScenario("harmonic", 0.25, 20, 0.01)
    grid = [0.0, 0.1, 0.3]
    res = evolve_master(_cat_density(20, 1.0), scn, grid)
    assert res.halvings == 0 and res.dt_used == 0.01
    assert res.max_trace_drift <= 1e-8
    assert res.positivity_ok
    assert len(res.states) == len(grid)
    assert np.array_equal(res.states[0], _cat_density(20, 1.0))
    rho = res.states[-1]
    assert np.abs(rho - rho.conj().T).max() < 1e-12


def test_evolve_master_halves_unstable_step():
    scn = MasterEqScenario("harmonic", 2.0, 16, 0.5)
    res = evolve_master(_cat_density(16, 1.0), scn, [0.0, 2.0])
    assert res.halvings >= 1
    assert res.dt_used == 0.5 / 2 ** res.halvings
    assert res.max_trace_drift <= 1e-8


def test_evolve_master_gives_up_after_max_halvings():
    scn = MasterEqScenario("harmonic", 50.0, 24, 0.25)
    with pytest.raises(MasterEqError, match="persisted"):
        evolve_master(_cat_density(24, 1.0), scn, [0.0, 2.0])


def test_grid_validation():
    scn = MasterEqScenario("none", 0.1, 8, 0.02)
    rho0 = _cat_density(8, 0.5)
    with pytest.raises(MasterEqError, match="integer multiple"):
        evolve_master(rho0, scn, [0.05])
    with pytest.raises(MasterEqError, match="ascending"):
        evolve_master(rho0, scn, [0.2, 0.1])


def test_coherence_profile_visibility():
    lam, x0 = 0.3, 1.5
    scn = MasterEqScenario("none", lam, 30, 0.01)
    res = evolve_master(_cat_density(30, x0), scn, [0.0, 0.1, 0.2])
    xs = np.linspace(-4.0, 4.0, 81)
    vis = coherence_profile(res, xs, (0.8, 2.2), (-2.2, -0.8), 1.0, 1.0)
    assert vis[0] > 0.95
    assert vis[0] > vis[1] > vis[2]
    # expected e^{-4 lam x0^2 t} envelope, loose bounds for patch-mass effects
    assert 0.4 < vis[2] / vis[0] < 0.75
    with pytest.raises(MasterEqError, match="no grid points"):
        coherence_profile(res, xs, (10.0, 11.0), (-2.0, -1.0), 1.0, 1.0)


def test_backend_name_reports_kernel():
    assert backend_name() in ("cython", "numpy")
