"""Backend parity: the compiled stepper must match the NumPy one bit for bit."""
import numpy as np
import pytest

from oscidec._kernels import backend, rk4_steps, rk4_steps_numpy


def _random_problem(d: int, seed: int):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    rho = np.outer(v, v.conj())
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    x = ((a + a.T) / np.sqrt(2)).astype(complex)
    p = (1j / np.sqrt(2) * (a.T - a)).astype(complex)
    H = p @ p / 2 + x @ x / 2
    lam = 0.35
    K = 1j * H + lam * (x @ x)
    return rho, K, K.conj().T, x, 2 * lam


def _loop_reference(rho, K, Kd, X, two_lam, dt, n_steps):
    """Deliberately naive RK4 with explicit matmuls, no in-place tricks."""
    def rhs(r):
        return -(K @ r + r @ Kd) + two_lam * (X @ r @ X)

    r = rho.copy()
    for _ in range(n_steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * dt * k1)
        k3 = rhs(r + 0.5 * dt * k2)
        k4 = rhs(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return r


def test_numpy_kernel_matches_naive_reference():
    rho, K, Kd, X, two_lam = _random_problem(8, 1)
    got = rk4_steps_numpy(rho, K, Kd, X, two_lam, 0.01, 25)
    want = _loop_reference(rho, K, Kd, X, two_lam, 0.01, 25)
    assert np.abs(got - want).max() < 1e-13


def test_active_backend_matches_numpy_to_rounding():
    # both route through BLAS zgemm; only summation-order round-off may differ
    for d, seed in ((6, 2), (24, 3), (40, 4)):
        rho, K, Kd, X, two_lam = _random_problem(d, seed)
        got = rk4_steps(rho, K, Kd, X, two_lam, 0.005, 40)
        ref = rk4_steps_numpy(rho, K, Kd, X, two_lam, 0.005, 40)
        assert np.abs(got - ref).max() < 1e-13


def test_zero_dephasing_branch():
    rho, _, _, X, _ = _random_problem(10, 5)
    a = np.diag(np.sqrt(np.arange(1, 10)), 1)
    p = (1j / np.sqrt(2) * (a.T - a)).astype(complex)
    H = p @ p / 2 + X @ X / 2
    K = 1j * H                       # no decay part when dephasing is off
    got = rk4_steps(rho, K, K.conj().T, X, 0.0, 0.01, 10)
    ref = rk4_steps_numpy(rho, K, K.conj().T, X, 0.0, 0.01, 10)
    assert np.abs(got - ref).max() < 1e-13
    # pure unitary part keeps the state normalized
    assert abs(np.trace(got).real - 1.0) < 1e-12


def test_input_state_is_not_mutated():
    rho, K, Kd, X, two_lam = _random_problem(8, 7)
    before = rho.copy()
    rk4_steps(rho, K, Kd, X, two_lam, 0.01, 5)
    assert np.array_equal(rho, before)


def test_backend_label_consistent():
    assert backend in ("cython", "numpy")
    if backend == "cython":
        from oscidec._kernels import _master_cy
        assert rk4_steps is _master_cy.rk4_steps
    else:
        assert rk4_steps is rk4_steps_numpy
