"""Pure-Python versions of the compiled kernels (same results, bit for bit)."""

from __future__ import annotations

import numpy as np

from .arith_core import ddf_pattern as _ddf_reference


def ddf_pattern(coeffs, p: int) -> list[int]:
    return _ddf_reference(list(coeffs), int(p))


def dirichlet_convolve(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = len(u) - 1
    w = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        ud = int(u[d])
        if ud:
            w[d::d] += ud * v[1 : n // d + 1]
    return w


def assemble_multiplicative(spf: np.ndarray, offsets: np.ndarray, local: np.ndarray) -> np.ndarray:
    n = len(spf) - 1
    a = [0] * (n + 1)
    if n >= 1:
        a[1] = 1
    spf_l = spf.tolist()
    off_l = offsets.tolist()
    loc_l = local.tolist()
    for i in range(2, n + 1):
        p = spf_l[i]
        off = off_l[p]
        if off < 0:
            continue
        m, k = i, 0
        while m % p == 0:
            m //= p
            k += 1
        a[i] = a[m] * loc_l[off + k]
    return np.array(a, dtype=np.int64)
