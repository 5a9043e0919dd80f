# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same signatures as the fallback."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef double complex cplx


def hall_accumulate_int(const cnp.int64_t[:] m, const cnp.int64_t[:] a,
                        const cnp.int64_t[:] b, const cnp.int64_t[:] mult,
                        const cnp.int64_t[:] f, const cnp.int64_t[:] g,
                        cnp.int64_t[:] out):
    cdef Py_ssize_t k, n = m.shape[0]
    cdef cnp.int64_t fa, gb
    with nogil:
        for k in range(n):
            fa = f[a[k]]
            if fa == 0:
                continue
            gb = g[b[k]]
            if gb == 0:
                continue
            out[m[k]] += mult[k] * fa * gb


def hall_accumulate_complex(const cnp.int64_t[:] m, const cnp.int64_t[:] a,
                            const cnp.int64_t[:] b, const cnp.int64_t[:] mult,
                            const cplx[:] f, const cplx[:] g, cplx[:] out):
    cdef Py_ssize_t k, n = m.shape[0]
    with nogil:
        for k in range(n):
            out[m[k]] += mult[k] * f[a[k]] * g[b[k]]


cdef int _solve(cplx* M, cplx* x, int s) nogil:
    # Gaussian elimination with partial pivoting, in place; M is row-major s x s.
    cdef int i, j, r, p
    cdef double best, v
    cdef cplx t, piv
    for i in range(s):
        p = i
        best = abs(M[i * s + i])
        for r in range(i + 1, s):
            v = abs(M[r * s + i])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            return -1
        if p != i:
            for j in range(s):
                t = M[i * s + j]
                M[i * s + j] = M[p * s + j]
                M[p * s + j] = t
            t = x[i]
            x[i] = x[p]
            x[p] = t
        piv = M[i * s + i]
        for r in range(i + 1, s):
            t = M[r * s + i] / piv
            if t != 0:
                for j in range(i, s):
                    M[r * s + j] -= t * M[i * s + j]
                x[r] -= t * x[i]
    for i in range(s - 1, -1, -1):
        t = x[i]
        for j in range(i + 1, s):
            t -= M[i * s + j] * x[j]
        x[i] = t / M[i * s + i]
    return 0


def collocation_sweep(cplx[:, :] coef, cplx[:, :] forcing, const double[:] delta,
                      cplx u_start, bint reverse, const double[:, :] A, const double[:] bw):
    cdef Py_ssize_t n = coef.shape[0]
    cdef int s = coef.shape[1]
    U_arr = np.empty((n, s), dtype=np.complex128)
    K_arr = np.empty((n, s), dtype=np.complex128)
    E_arr = np.empty(n + 1, dtype=np.complex128)
    cdef cplx[:, :] U = U_arr
    cdef cplx[:, :] K = K_arr
    cdef cplx[:] E = E_arr
    cdef cplx* M = <cplx*> malloc(s * s * sizeof(cplx))
    cdef cplx* x = <cplx*> malloc(s * sizeof(cplx))
    cdef Py_ssize_t i, step
    cdef int r, c, status = 0
    cdef double h
    cdef cplx u0, acc, w
    try:
        with nogil:
            if not reverse:
                E[0] = u_start
            else:
                E[n] = u_start
            for step in range(n):
                i = step if not reverse else n - 1 - step
                h = delta[i]
                u0 = E[i] if not reverse else E[i + 1]
                for r in range(s):
                    for c in range(s):
                        if not reverse:
                            w = -coef[i, r] * h * A[r, c]
                        else:
                            w = coef[i, r] * h * (bw[c] - A[r, c])
                        if r == c:
                            w = w + 1.0
                        M[r * s + c] = w
                    x[r] = coef[i, r] * u0 + forcing[i, r]
                if _solve(M, x, s) != 0:
                    status = -1
                    break
                for r in range(s):
                    K[i, r] = x[r]
                    acc = 0
                    for c in range(s):
                        if not reverse:
                            acc = acc + A[r, c] * x[c]
                        else:
                            acc = acc + (bw[c] - A[r, c]) * x[c]
                    U[i, r] = u0 + h * acc if not reverse else u0 - h * acc
                acc = 0
                for c in range(s):
                    acc = acc + bw[c] * x[c]
                if not reverse:
                    E[i + 1] = u0 + h * acc
                else:
                    E[i] = u0 - h * acc
    finally:
        free(M)
        free(x)
    if status != 0:
        raise ZeroDivisionError("singular collocation system")
    return U_arr, K_arr, E_arr
