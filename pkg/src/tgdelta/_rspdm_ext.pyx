# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair loop for the hard-core boson density matrix.

Same contract as ``tgdelta._rspdm_py.rspdm_upper``: for each pair a <= b an
LU factorization with partial pivoting of P = I - 2 (C[b] - C[a]) gives
det(P) and P^{-1} psi(a); the entry is det(P) * psi(b) . P^{-1} psi(a).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

NAME = "cython"


cdef double _pair(const double[:, :, ::1] C, const double[:, ::1] psi_t,
                  Py_ssize_t a, Py_ssize_t b, Py_ssize_t n,
                  double[:, ::1] P, double[::1] z, double* det_out) noexcept nogil:
    cdef Py_ssize_t i, j, k, piv
    cdef double det = 1.0, big, t, s
    for i in range(n):
        for j in range(n):
            P[i, j] = -2.0 * (C[b, i, j] - C[a, i, j])
        P[i, i] += 1.0
        z[i] = psi_t[a, i]
    for k in range(n):
        piv = k
        big = fabs(P[k, k])
        for i in range(k + 1, n):
            t = fabs(P[i, k])
            if t > big:
                big = t
                piv = i
        if big == 0.0:
            det_out[0] = 0.0
            return 0.0
        if piv != k:
            det = -det
            for j in range(n):
                t = P[k, j]
                P[k, j] = P[piv, j]
                P[piv, j] = t
            t = z[k]
            z[k] = z[piv]
            z[piv] = t
        det *= P[k, k]
        for i in range(k + 1, n):
            t = P[i, k] / P[k, k]
            if t != 0.0:
                for j in range(k + 1, n):
                    P[i, j] -= t * P[k, j]
                z[i] -= t * z[k]
    for i in range(n - 1, -1, -1):
        s = z[i]
        for j in range(i + 1, n):
            s -= P[i, j] * z[j]
        z[i] = s / P[i, i]
    s = 0.0
    for i in range(n):
        s += psi_t[b, i] * z[i]
    det_out[0] = det
    return det * s


def rspdm_upper(psi_t, overlaps, double det_floor):
    cdef const double[:, ::1] ps = np.ascontiguousarray(psi_t, dtype=np.float64)
    cdef const double[:, :, ::1] C = np.ascontiguousarray(overlaps, dtype=np.float64)
    cdef Py_ssize_t m = ps.shape[0], n = ps.shape[1]
    rho_arr = np.zeros((m, m))
    flag_arr = np.zeros((m, m), dtype=np.uint8)
    cdef double[:, ::1] rho = rho_arr
    cdef unsigned char[:, ::1] flags = flag_arr
    cdef double[:, ::1] P = np.empty((n, n))
    cdef double[::1] z = np.empty(n)
    cdef Py_ssize_t a, b
    cdef double v, det = 0.0
    with nogil:
        for a in range(m):
            for b in range(a, m):
                v = _pair(C, ps, a, b, n, P, z, &det)
                if fabs(det) < det_floor:
                    flags[a, b] = 1
                    v = 0.0
                rho[a, b] = v
                rho[b, a] = v
    return rho_arr, flag_arr
