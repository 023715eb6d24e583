"""Pure-numpy implementations of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np


def gemm_nt_i8(A, Bt, out, kblock):
    depth = A.shape[1]
    for k0 in range(0, depth, max(1, kblock)):
        a = A[:, k0 : k0 + kblock].astype(np.int32)
        b = Bt[:, k0 : k0 + kblock].astype(np.int32)
        out += a @ b.T


def gemm_nt_i64(A, Bt, out, kblock):
    depth = A.shape[1]
    for k0 in range(0, depth, max(1, kblock)):
        out += A[:, k0 : k0 + kblock] @ Bt[:, k0 : k0 + kblock].T


def popcount_ip(PX, PY, d, out):
    for i in range(PX.shape[0]):
        h = np.bitwise_count(PX[i][None, :] ^ PY).sum(axis=1, dtype=np.int64)
        out[i, :] = d - 2 * h


def gf_mul(a, c, low, b):
    top = 1 << (b - 1)
    mask = (1 << b) - 1
    r = 0
    while c:
        if c & 1:
            r ^= a
        c >>= 1
        carry = a & top
        a = (a << 1) & mask
        if carry:
            a ^= low
    return r


def gf_mul_vec(a, c, low, b, out):
    a = np.array(a, dtype=np.uint64)
    c = np.array(c, dtype=np.uint64)
    r = np.zeros_like(a)
    top = np.uint64(1 << (b - 1))
    mask = np.uint64((1 << b) - 1)
    low = np.uint64(low)
    one = np.uint64(1)
    for _ in range(b):
        r ^= np.where(c & one, a, np.uint64(0))
        c >>= one
        carry = (a & top) != 0
        a = (a << one) & mask
        a ^= np.where(carry, low, np.uint64(0))
    out[:] = r
