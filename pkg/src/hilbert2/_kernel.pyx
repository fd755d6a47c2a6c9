# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: exact modular convolutions with zero-skipping.

Same contracts as hilbert2._kernel_py; selected at import in hilbert2._ops.
Only the int64 paths live here (mod < 2^31 so a reduced accumulator plus
one product never overflows); wider moduli fall back to Python big ints.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv1d_mod_i64(const cnp.int64_t[::1] a, const cnp.int64_t[::1] b, long long mod):
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_arr = np.zeros(la + lb - 1, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef long long v
    for i in range(la):
        v = a[i]
        if v == 0:
            continue
        v %= mod
        for j in range(lb):
            if b[j] != 0:
                out[i + j] = (out[i + j] + v * (b[j] % mod)) % mod
    return out_arr


def conv2d_mod_i64(const cnp.int64_t[:, ::1] a, const cnp.int64_t[:, ::1] b, long long mod):
    cdef Py_ssize_t n1 = a.shape[0], m1 = a.shape[1]
    cdef Py_ssize_t n2 = b.shape[0], m2 = b.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out_arr = np.zeros(
        (n1 + n2 - 1, m1 + m2 - 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i1, j1, i2, j2
    cdef long long v
    for i1 in range(n1):
        for j1 in range(m1):
            v = a[i1, j1]
            if v == 0:
                continue
            v %= mod
            for i2 in range(n2):
                for j2 in range(m2):
                    if b[i2, j2] != 0:
                        out[i1 + i2, j1 + j2] = (
                            out[i1 + i2, j1 + j2] + v * (b[i2, j2] % mod)) % mod
    return out_arr


def grid_vals_i64(const cnp.int64_t[:, ::1] arr, long long p, long long cap):
    """Per-entry p-adic valuation of an int64 grid (cap for zeros)."""
    cdef Py_ssize_t n = arr.shape[0], m = arr.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out_arr = np.empty((n, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef long long x, v
    for i in range(n):
        for j in range(m):
            x = arr[i, j]
            if x == 0:
                out[i, j] = cap
                continue
            v = 0
            while x % p == 0 and v < cap:
                x //= p
                v += 1
            out[i, j] = v
    return out_arr
