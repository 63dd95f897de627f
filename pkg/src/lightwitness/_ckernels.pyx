# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature-moment kernel; same contract as ``_pykernels``."""
import numpy as np

cdef double SQRT2 = 1.4142135623730951


def offdiag_moments(coeff, lam, pp, pq):
    cdef double complex[:, :, ::1] c = np.ascontiguousarray(coeff, dtype=np.complex128)
    cdef double complex[:, ::1] l = np.ascontiguousarray(lam, dtype=np.complex128)
    cdef double complex[:, :, ::1] p = np.ascontiguousarray(pp, dtype=np.complex128)
    cdef double complex[:, :, ::1] q = np.ascontiguousarray(pq, dtype=np.complex128)
    cdef Py_ssize_t G = c.shape[0], T = c.shape[1], N = c.shape[2]
    mean_x = np.empty((G, T))
    mean_y = np.empty((G, T))
    cross_x = np.empty((G, T))
    cross_y = np.empty((G, T))
    cdef double[:, ::1] mx = mean_x, my = mean_y, cx = cross_x, cy = cross_y
    cdef Py_ssize_t g, t, i, j
    cdef double complex m, ci, cj
    cdef double sp, sq
    with nogil:
        for g in range(G):
            for t in range(T):
                m = 0
                sp = 0.0
                sq = 0.0
                for i in range(N):
                    ci = c[g, t, i]
                    m = m + ci * l[t, i]
                    for j in range(N):
                        if i == j:
                            continue
                        cj = c[g, t, j]
                        sp = sp + (ci * cj * p[t, i, j]).real
                        sq = sq + (ci * cj.conjugate() * q[t, i, j]).real
                mx[g, t] = SQRT2 * m.real
                my[g, t] = -SQRT2 * m.imag
                cx[g, t] = sp + sq
                cy[g, t] = sq - sp
    return mean_x, mean_y, cross_x, cross_y
