# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step RK4 stepper for the dephasing master equation.

Same contract as the NumPy fallback: advance
    drho/dt = -(K rho + rho Kd) + two_lam * X rho X
by n_steps of size dt.  All matrix products go through BLAS zgemm; the
row-major trick (swap operand order) avoids any copies.
"""
import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

ctypedef double complex zdouble


cdef void _mm(zdouble* a, zdouble* b, zdouble* c, int n,
              zdouble alpha, zdouble beta) noexcept nogil:
    # row-major C = alpha * A @ B + beta * C via column-major zgemm(B, A)
    cdef char nt = b'N'
    zgemm(&nt, &nt, &n, &n, &n, &alpha, b, &n, a, &n, &beta, c, &n)


cdef void _rhs(zdouble* r, zdouble* K, zdouble* Kd, zdouble* X,
               double two_lam, zdouble* out, zdouble* tmp, int n) noexcept nogil:
    cdef zdouble one = 1.0, zero = 0.0
    _mm(K, r, out, n, -1.0 + 0j, zero)       # out = -K r
    _mm(r, Kd, out, n, -1.0 + 0j, one)       # out -= r Kd
    if two_lam != 0.0:
        _mm(X, r, tmp, n, one, zero)          # tmp = X r
        _mm(tmp, X, out, n, two_lam + 0j, one)  # out += two_lam X r X


def rk4_steps(cnp.ndarray[cnp.complex128_t, ndim=2] rho,
              cnp.ndarray[cnp.complex128_t, ndim=2] K,
              cnp.ndarray[cnp.complex128_t, ndim=2] Kd,
              cnp.ndarray[cnp.complex128_t, ndim=2] X,
              double two_lam, double dt, long n_steps):
    cdef int n = rho.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] r = np.ascontiguousarray(rho).copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k1 = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k2 = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k3 = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k4 = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] stage = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] tmp = np.empty((n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Kc = np.ascontiguousarray(K)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Kdc = np.ascontiguousarray(Kd)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Xc = np.ascontiguousarray(X)
    cdef zdouble* rp = &r[0, 0]
    cdef zdouble* k1p = &k1[0, 0]
    cdef zdouble* k2p = &k2[0, 0]
    cdef zdouble* k3p = &k3[0, 0]
    cdef zdouble* k4p = &k4[0, 0]
    cdef zdouble* sp = &stage[0, 0]
    cdef zdouble* tp = &tmp[0, 0]
    cdef zdouble* Kp = &Kc[0, 0]
    cdef zdouble* Kdp = &Kdc[0, 0]
    cdef zdouble* Xp = &Xc[0, 0]
    cdef long step
    cdef Py_ssize_t i, nn = <Py_ssize_t> n * n
    cdef double half = 0.5 * dt, sixth = dt / 6.0

    with nogil:
        for step in range(n_steps):
            _rhs(rp, Kp, Kdp, Xp, two_lam, k1p, tp, n)
            for i in range(nn):
                sp[i] = rp[i] + half * k1p[i]
            _rhs(sp, Kp, Kdp, Xp, two_lam, k2p, tp, n)
            for i in range(nn):
                sp[i] = rp[i] + half * k2p[i]
            _rhs(sp, Kp, Kdp, Xp, two_lam, k3p, tp, n)
            for i in range(nn):
                sp[i] = rp[i] + dt * k3p[i]
            _rhs(sp, Kp, Kdp, Xp, two_lam, k4p, tp, n)
            for i in range(nn):
                rp[i] = rp[i] + sixth * (k1p[i] + 2.0 * (k2p[i] + k3p[i]) + k4p[i])
    return r
