"""NumPy reference implementation of the fixed-step RK4 dephasing stepper."""
from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]


def rk4_steps(rho: ComplexArray, K: ComplexArray, Kd: ComplexArray,
              X: ComplexArray, two_lam: float, dt: float,
              n_steps: int) -> ComplexArray:
    """Advance drho/dt = -(K rho + rho Kd) + two_lam * X rho X by n_steps."""
    rho = rho.copy()

    def rhs(r: ComplexArray) -> ComplexArray:
        out = -(K @ r + r @ Kd)
        if two_lam != 0.0:
            out += two_lam * (X @ r @ X)
        return out

    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + (0.5 * dt) * k1)
        k3 = rhs(rho + (0.5 * dt) * k2)
        k4 = rhs(rho + dt * k3)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return rho
