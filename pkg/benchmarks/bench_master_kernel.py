"""Compare the compiled and NumPy master-equation steppers.

Run:  python benchmarks/bench_master_kernel.py [--dims 24,40,64,96] [--steps 200]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from oscidec._kernels import backend, rk4_steps, rk4_steps_numpy


def _scenario(d: int, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    x = ((a + a.T) / np.sqrt(2.0)).astype(complex)
    p = (1j * np.sqrt(0.5) * (a.T - a)).astype(complex)
    H = p @ p / 2 + x @ x / 2
    K = 1j * H + 0.25 * (x @ x)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    rho = np.outer(v, v.conj())
    return rho, K, K.conj().T, x


def _time(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", default="24,40,64,96")
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    dims = [int(t) for t in args.dims.split(",")]
    print(f"selected backend at import: {backend}")
    print(f"{'dim':>5} {'compiled (s)':>13} {'numpy (s)':>11} {'speedup':>8} {'agree':>9}")
    for d in dims:
        rho, K, Kd, x = _scenario(d, seed=d)
        call = (rho.copy(), K, Kd, x, 0.5, 1e-4, args.steps)
        t_c = _time(rk4_steps, call, args.repeats)
        t_n = _time(rk4_steps_numpy, call, args.repeats)
        r_c = rk4_steps(rho.copy(), K, Kd, x, 0.5, 1e-4, args.steps)
        r_n = rk4_steps_numpy(rho.copy(), K, Kd, x, 0.5, 1e-4, args.steps)
        dev = float(np.max(np.abs(r_c - r_n)))
        print(f"{d:>5} {t_c:>13.4f} {t_n:>11.4f} {t_n / t_c:>8.2f} {dev:>9.1e}")


if __name__ == "__main__":
    main()
