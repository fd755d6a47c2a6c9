"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set HILBERT2_KERNEL=py to force the fallback (used by the benchmark and by
tests that compare the two implementations).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernel_py

try:
    from . import _kernel as _compiled  # compiled extension, optional
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

_FORCE = os.environ.get("HILBERT2_KERNEL", "").lower()
if _FORCE == "py":
    _compiled = None
elif _FORCE == "c" and _compiled is None:  # pragma: no cover
    raise ImportError("HILBERT2_KERNEL=c requested but the compiled kernel is not built")

HAVE_COMPILED = _compiled is not None
_I64_KERNEL_LIMIT = 2**31  # compiled kernel reduces per accumulate; needs mod < 2^31


def kernel_name() -> str:
    return "compiled" if HAVE_COMPILED else "numpy"


def conv1d_mod(a: np.ndarray, b: np.ndarray, mod: int) -> np.ndarray:
    if (
        _compiled is not None
        and a.dtype != object
        and b.dtype != object
        and mod < _I64_KERNEL_LIMIT
        and len(a)
        and len(b)
    ):
        return _compiled.conv1d_mod_i64(np.ascontiguousarray(a, dtype=np.int64),
                                        np.ascontiguousarray(b, dtype=np.int64), mod)
    return _kernel_py.conv1d_mod(a, b, mod)


def conv2d_mod(a: np.ndarray, b: np.ndarray, mod: int) -> np.ndarray:
    if (
        _compiled is not None
        and a.dtype != object
        and b.dtype != object
        and mod < _I64_KERNEL_LIMIT
        and a.size
        and b.size
    ):
        return _compiled.conv2d_mod_i64(np.ascontiguousarray(a, dtype=np.int64),
                                        np.ascontiguousarray(b, dtype=np.int64), mod)
    return _kernel_py.conv2d_mod(a, b, mod)


def conv2d_poly_mod(a: np.ndarray, b: np.ndarray, mod: int, red) -> np.ndarray:
    return _kernel_py.conv2d_poly_mod(a, b, mod, red)


def grid_vals(arr: np.ndarray, p: int, cap: int) -> np.ndarray:
    if _compiled is not None and arr.dtype != object and arr.ndim == 2:
        return _compiled.grid_vals_i64(np.ascontiguousarray(arr, dtype=np.int64), p, cap)
    return _kernel_py.grid_vals(arr, p, cap)
