"""Pure numpy / pure Python fallback for the hot convolution kernels.

The compiled extension (hilbert2._kernel) implements the same interface;
selection happens in hilbert2._ops at import time.

Exact modular convolutions only: the int64 fast path uses Kronecker
substitution (flatten the exponent grid into one axis) and is guarded
against overflow; anything that could overflow goes through Python big
integers.
"""

from __future__ import annotations

import numpy as np

_INT64_LIMIT = 2**62


def _i64_safe(mod: int, overlap: int) -> bool:
    # products < mod^2, summed over at most `overlap` aligned terms
    return mod * mod * max(overlap, 1) < _INT64_LIMIT


def conv1d_mod(a: np.ndarray, b: np.ndarray, mod: int) -> np.ndarray:
    """Exact 1-D convolution of integer vectors, reduced mod `mod`."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=a.dtype)
    if a.dtype != object and b.dtype != object and _i64_safe(mod, min(len(a), len(b))):
        return np.convolve(a.astype(np.int64), b.astype(np.int64)) % mod
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a.tolist()):
        if ai == 0:
            continue
        for j, bj in enumerate(b.tolist()):
            if bj:
                out[i + j] = (out[i + j] + ai * bj) % mod
    return np.array(out, dtype=object)


def conv2d_mod(a: np.ndarray, b: np.ndarray, mod: int) -> np.ndarray:
    """Exact 2-D convolution of integer grids, reduced mod `mod`.

    Kronecker substitution: rows are laid out with stride wide enough that
    column overflows cannot collide, so one 1-D convolution computes the
    2-D result.
    """
    n1, m1 = a.shape
    n2, m2 = b.shape
    mr, nr = m1 + m2 - 1, n1 + n2 - 1
    if a.dtype != object and b.dtype != object and _i64_safe(mod, min(n1 * m1, n2 * m2)):
        fa = np.zeros(n1 * mr, dtype=np.int64)
        fb = np.zeros(n2 * mr, dtype=np.int64)
        fa.reshape(n1, mr)[:, :m1] = a
        fb.reshape(n2, mr)[:, :m2] = b
        flat = np.convolve(fa, fb) % mod
        # row stride mr prevents collisions; indices beyond nr*mr are zero
        return flat[: nr * mr].reshape(nr, mr)
    out = np.zeros((nr, mr), dtype=object)
    al = a.tolist()
    bl = b.tolist()
    for i1 in range(n1):
        row_a = al[i1]
        for j1 in range(m1):
            v = row_a[j1]
            if v == 0:
                continue
            for i2 in range(n2):
                row_b = bl[i2]
                orow = out[i1 + i2]
                for j2 in range(m2):
                    w = row_b[j2]
                    if w:
                        orow[j1 + j2] = (orow[j1 + j2] + v * w) % mod
    return out


def conv2d_poly_mod(a: np.ndarray, b: np.ndarray, mod: int, red: np.ndarray) -> np.ndarray:
    """2-D convolution with an extra polynomial coefficient axis.

    a, b have shape (n, m, f); coefficients multiply as polynomials of
    degree < f and the overflowing degrees f..2f-2 are reduced via `red`
    (row k holds the degree-(f+k) reduction vector).
    """
    f = a.shape[2]
    n1, m1, _ = a.shape
    n2, m2, _ = b.shape
    full = np.zeros((n1 + n2 - 1, m1 + m2 - 1, 2 * f - 1), dtype=object)
    for d1 in range(f):
        sl1 = a[:, :, d1]
        if not sl1.any():
            continue
        for d2 in range(f):
            sl2 = b[:, :, d2]
            if not sl2.any():
                continue
            full[:, :, d1 + d2] = (full[:, :, d1 + d2] + conv2d_mod(sl1, sl2, mod)) % mod
    out = full[:, :, :f]
    for k in range(f - 1):
        over = full[:, :, f + k]
        if not over.any():
            continue
        for i in range(f):
            if red[k][i]:
                out[:, :, i] = (out[:, :, i] + over * int(red[k][i])) % mod
    return out % mod


def grid_vals(arr: np.ndarray, p: int, cap: int) -> np.ndarray:
    """Per-entry p-adic valuation of an integer grid (cap for zeros)."""
    if arr.dtype != object:
        out = np.full(arr.shape, cap, dtype=np.int64)
        work = arr.copy()
        alive = work != 0
        v = 0
        while alive.any() and v < cap:
            rem = np.zeros_like(work)
            rem[alive] = work[alive] % p
            stop = alive & (rem != 0)
            out[stop] = v
            alive = alive & (rem == 0)
            work[alive] //= p
            v += 1
        return out
    out = np.full(arr.shape, cap, dtype=np.int64)
    it = np.nditer(out, flags=["multi_index"])
    for _ in it:
        x = int(arr[it.multi_index])
        if x == 0:
            continue
        v = 0
        while x % p == 0 and v < cap:
            x //= p
            v += 1
        out[it.multi_index] = v
    return out
