# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, acosh, tanh, sqrt, log, fabs, isfinite

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex catanh(double complex)
    double complex ctanh(double complex)
    double complex conj(double complex)
    double cabs(double complex)

DEF MAX_FALSI_STEPS = 200
DEF POLISH_STEPS = 3


cdef inline double complex _scaled_arctanh(double complex s) nogil:
    cdef double complex r = csqrt(s)
    return catanh(1.0 / r) / r


cdef inline void _point(double x, double v, double complex *s, double *re_j) nogil:
    cdef double cu = x * sin(v) / v + cos(v)
    cdef double u
    cdef double complex w, t
    if cu < 1.0:
        cu = 1.0
    u = acosh(cu)
    w = u + 1j * v
    t = ctanh(0.5 * w)
    s[0] = 1.0 / (t * t)
    re_j[0] = v * sinh(u) / sin(v) + u


cdef inline double _re_j(double x, double v) nogil:
    cdef double sv = sin(v)
    cdef double cu = x * sv / v + cos(v)
    if cu < 1.0:
        cu = 1.0
    return v * sqrt(cu * cu - 1.0) / sv + acosh(cu)


def gamma1_solve(double x, double vstar, y_in):
    """Same contract as the numpy version; Illinois regula falsi replaces bisection."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y_in, dtype=np.float64).ravel()
    cdef Py_ssize_t n = y.shape[0], i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double j_top = sqrt(x * (x + 2.0)) + acosh(x + 1.0)
    cdef double lo, hi, f_lo, f_hi, mid, f_mid, target, re_j
    cdef double complex s, val, der, trial, trial_val
    cdef int it, side
    with nogil:
        for i in range(n):
            target = 2.0 * sqrt(y[i])
            lo = vstar
            hi = 0.0
            f_lo = -target
            f_hi = j_top - target
            side = 0
            for it in range(MAX_FALSI_STEPS):
                mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
                if not (lo < mid < hi):
                    mid = 0.5 * (lo + hi)
                f_mid = _re_j(x, mid) - target
                if f_mid == 0.0:
                    lo = mid
                    hi = mid
                    break
                if f_mid < 0.0:
                    lo = mid
                    f_lo = f_mid
                    if side == -1:
                        f_hi = 0.5 * f_hi
                    side = -1
                else:
                    hi = mid
                    f_hi = f_mid
                    if side == 1:
                        f_lo = 0.5 * f_lo
                    side = 1
                if hi - lo <= 4e-16 * fabs(lo):
                    break
            _point(x, 0.5 * (lo + hi), &s, &re_j)
            if s.imag == 0.0:
                s = s.real + 0j
            val = csqrt(s) * (x + 2.0 * _scaled_arctanh(s))
            for it in range(POLISH_STEPS):
                der = (0.5 * x - 1.0 / (s - 1.0)) / csqrt(s)
                if cabs(der) == 0.0:
                    break
                trial = s - (val - target) / der
                trial_val = csqrt(trial) * (x + 2.0 * _scaled_arctanh(trial))
                if not (isfinite(trial_val.real) and isfinite(trial_val.imag)):
                    break
                if cabs(trial_val - target) >= cabs(val - target):
                    break
                s = trial
                val = trial_val
            if s.imag < 0:
                s = conj(s)
            out[i] = s
    return out.reshape(np.shape(y_in))


cdef inline double _norm2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def log_kernel_sums(sq_u_in, weights_in, sq_x_in):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] sq_u = np.ascontiguousarray(sq_u_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] sq_x = np.ascontiguousarray(sq_x_in, dtype=np.complex128)
    cdef Py_ssize_t rows = sq_u.shape[0], cols = sq_u.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(rows, dtype=np.float64)
    cdef double complex a, ab, xi, num, den
    cdef double acc
    with nogil:
        for i in range(rows):
            xi = sq_x[i]
            acc = 0.0
            for j in range(cols):
                a = sq_u[i, j]
                ab = conj(a)
                num = (a + xi) * (ab - xi)
                den = (a - xi) * (ab + xi)
                # log|num/den| from squared moduli: one log, no square roots
                acc = acc + 0.5 * w[i, j] * log(_norm2(num) / _norm2(den))
            out[i] = acc
    return out
