# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step RK4 integrator for ``dy/dt = -V y``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil

cnp.import_array()


cdef inline void _rhs(const double complex[:, ::1] V, const double complex* y,
                      double complex* out, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double complex acc
    for i in range(m):
        acc = 0
        for j in range(m):
            acc = acc + V[i, j] * y[j]
        out[i] = -acc


def rk4_integrate(V, y0, times, double max_step):
    """Classical RK4 sampled at ``times``; steps never exceed ``max_step``."""
    cdef const double complex[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.complex128)
    cdef double complex[::1] y = np.array(y0, dtype=np.complex128).ravel()
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t nt = tv.shape[0]
    out_arr = np.empty((nt, m), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[:, ::1] work = np.empty((5, m), dtype=np.complex128)
    cdef double complex* k1 = &work[0, 0]
    cdef double complex* k2 = &work[1, 0]
    cdef double complex* k3 = &work[2, 0]
    cdef double complex* k4 = &work[3, 0]
    cdef double complex* tmp = &work[4, 0]
    cdef double t = tv[0] if nt else 0.0
    cdef double span, h
    cdef Py_ssize_t k, step, nsteps, i

    with nogil:
        for k in range(nt):
            span = tv[k] - t
            if span > 0:
                nsteps = <Py_ssize_t> ceil(span / max_step)
                h = span / nsteps
                for step in range(nsteps):
                    _rhs(Vv, &y[0], k1, m)
                    for i in range(m):
                        tmp[i] = y[i] + 0.5 * h * k1[i]
                    _rhs(Vv, tmp, k2, m)
                    for i in range(m):
                        tmp[i] = y[i] + 0.5 * h * k2[i]
                    _rhs(Vv, tmp, k3, m)
                    for i in range(m):
                        tmp[i] = y[i] + h * k3[i]
                    _rhs(Vv, tmp, k4, m)
                    for i in range(m):
                        y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                t = tv[k]
            for i in range(m):
                out[k, i] = y[i]
    return out_arr
