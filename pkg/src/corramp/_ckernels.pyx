# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror corramp._kernels_py exactly."""

from libc.stdint cimport int8_t, int32_t, int64_t, uint64_t

import numpy as np

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

DEF TILE = 4


cdef inline void _dot4_i8(const int8_t* a, const int8_t* b0, const int8_t* b1,
                          const int8_t* b2, const int8_t* b3, Py_ssize_t n,
                          int32_t* acc) noexcept nogil:
    cdef Py_ssize_t k
    cdef int32_t s0 = 0, s1 = 0, s2 = 0, s3 = 0
    cdef int32_t av
    for k in range(n):
        av = a[k]
        s0 += av * b0[k]
        s1 += av * b1[k]
        s2 += av * b2[k]
        s3 += av * b3[k]
    acc[0] = s0
    acc[1] = s1
    acc[2] = s2
    acc[3] = s3


cdef inline int32_t _dot_i8(const int8_t* a, const int8_t* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef int32_t s = 0
    for k in range(n):
        s += <int32_t>a[k] * b[k]
    return s


def gemm_nt_i8(const int8_t[:, ::1] A, const int8_t[:, ::1] Bt, int64_t[:, ::1] out,
               Py_ssize_t kblock):
    """out += A @ Bt.T with int32 partial sums over k-chunks of length kblock."""
    cdef Py_ssize_t m = A.shape[0], n = Bt.shape[0], depth = A.shape[1]
    cdef Py_ssize_t k0, klen, i, j, jj
    cdef int32_t acc[4]
    if m == 0 or n == 0 or depth == 0:
        return
    with nogil:
        k0 = 0
        while k0 < depth:
            klen = kblock
            if k0 + klen > depth:
                klen = depth - k0
            for i in range(m):
                j = 0
                while j + TILE <= n:
                    _dot4_i8(&A[i, k0], &Bt[j, k0], &Bt[j + 1, k0], &Bt[j + 2, k0],
                             &Bt[j + 3, k0], klen, acc)
                    for jj in range(TILE):
                        out[i, j + jj] += acc[jj]
                    j += TILE
                while j < n:
                    out[i, j] += _dot_i8(&A[i, k0], &Bt[j, k0], klen)
                    j += 1
            k0 += klen


def gemm_nt_i64(const int64_t[:, ::1] A, const int64_t[:, ::1] Bt, int64_t[:, ::1] out,
                Py_ssize_t kblock):
    """out += A @ Bt.T in int64, blocked over the shared dimension."""
    cdef Py_ssize_t m = A.shape[0], n = Bt.shape[0], depth = A.shape[1]
    cdef Py_ssize_t k0, k1, i, j, k
    cdef int64_t s
    cdef const int64_t* a
    cdef const int64_t* b
    with nogil:
        k0 = 0
        while k0 < depth:
            k1 = k0 + kblock
            if k1 > depth:
                k1 = depth
            for i in range(m):
                a = &A[i, 0]
                for j in range(n):
                    b = &Bt[j, 0]
                    s = 0
                    for k in range(k0, k1):
                        s += a[k] * b[k]
                    out[i, j] += s
            k0 = k1


def popcount_ip(const uint64_t[:, ::1] PX, const uint64_t[:, ::1] PY, int64_t d,
                int64_t[:, ::1] out):
    """out[i, j] = d - 2 * popcount(PX[i] ^ PY[j])."""
    cdef Py_ssize_t m = PX.shape[0], n = PY.shape[0], w = PX.shape[1]
    cdef Py_ssize_t i, j, k
    cdef int64_t h
    cdef const uint64_t* x
    cdef const uint64_t* y
    with nogil:
        for i in range(m):
            x = &PX[i, 0]
            for j in range(n):
                y = &PY[j, 0]
                h = 0
                for k in range(w):
                    h += __builtin_popcountll(x[k] ^ y[k])
                out[i, j] = d - 2 * h


cdef inline uint64_t _gf_mul(uint64_t a, uint64_t c, uint64_t low, int b) noexcept nogil:
    cdef uint64_t top = (<uint64_t>1) << (b - 1)
    cdef uint64_t mask = (top << 1) - 1 if b < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t r = 0
    cdef uint64_t carry
    while c:
        if c & 1:
            r ^= a
        c >>= 1
        carry = a & top
        a = (a << 1) & mask
        if carry:
            a ^= low
    return r


def gf_mul(uint64_t a, uint64_t c, uint64_t low, int b):
    return _gf_mul(a, c, low, b)


def gf_mul_vec(const uint64_t[::1] a, const uint64_t[::1] c, uint64_t low, int b,
               uint64_t[::1] out):
    cdef Py_ssize_t i, n = a.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _gf_mul(a[i], c[i], low, b)
