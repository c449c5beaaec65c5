# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for banded and diagonal accumulation along one axis.

Each output element is owned by exactly one loop iteration, so the parallel
loops need no reductions and results do not depend on the thread count.
"""

from cython.parallel cimport prange

NAME = "cython"

ctypedef fused scalar:
    double
    double complex


def band_accumulate(scalar[:, :, ::1] out, scalar[:, :, ::1] src,
                    const long long[::1] offsets, const scalar[:, ::1] bands, scalar coeff):
    cdef Py_ssize_t A = src.shape[0], n = src.shape[1], B = src.shape[2]
    cdef Py_ssize_t K = offsets.shape[0]
    cdef Py_ssize_t a, i, j, k, b, row
    cdef scalar c
    if B == 1:
        for a in prange(A, nogil=True, schedule="static"):
            for i in range(n):
                for k in range(K):
                    j = i + offsets[k]
                    if j >= 0 and j < n:
                        out[a, i, 0] = out[a, i, 0] + coeff * bands[k, i] * src[a, j, 0]
    else:
        for row in prange(A * n, nogil=True, schedule="static"):
            a = row // n
            i = row - a * n
            for k in range(K):
                j = i + offsets[k]
                if j >= 0 and j < n:
                    c = coeff * bands[k, i]
                    for b in range(B):
                        out[a, i, b] = out[a, i, b] + c * src[a, j, b]


def _diag(scalar[:, ::1] out, scalar[:, ::1] src, const double[::1] diag, scalar coeff):
    cdef Py_ssize_t A = src.shape[0], M = src.shape[1]
    cdef Py_ssize_t a, m
    for a in prange(A, nogil=True, schedule="static"):
        for m in range(M):
            out[a, m] = out[a, m] + coeff * diag[m] * src[a, m]


def diag_accumulate(out, src, diag, coeff):
    m = diag.size
    o = out.reshape(-1, m)
    s = src.reshape(-1, m)
    _diag(o, s, diag.reshape(-1), o.dtype.type(coeff))
