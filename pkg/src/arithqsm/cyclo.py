"""Exact arithmetic in Z[zeta_r] using the power basis modulo Phi_r.

A cyclotomic integer is a tuple of phi(r) ints, coefficient of zeta**j at
index j.  Reduction modulo the monic Phi_r makes the representation unique,
so equality of tuples is equality of numbers.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def cyclotomic_poly(r: int) -> tuple[int, ...]:
    """Coefficients of Phi_r, low degree first."""
    if r < 1:
        raise ValueError("order must be positive")
    num = [-1] + [0] * (r - 1) + [1]  # x^r - 1
    for d in range(1, r):
        if r % d == 0:
            num = _exact_div(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_div(a: list[int], b: list[int]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db]  # b is monic
        q[k] = c
        if c:
            for j in range(db + 1):
                a[k + j] -= c * b[j]
    assert not any(a[:db]), "inexact cyclotomic division"
    return q


def phi(r: int) -> int:
    return len(cyclotomic_poly(r)) - 1


def _reduce(c: list[int], r: int) -> tuple[int, ...]:
    f = cyclotomic_poly(r)
    n = len(f) - 1
    c = list(c) + [0] * max(0, n - len(c))
    for k in range(len(c) - 1, n - 1, -1):
        a = c[k]
        if a:
            for j in range(n + 1):
                c[k - n + j] -= a * f[j]
    return tuple(c[:n])


@lru_cache(maxsize=None)
def power_table(r: int) -> np.ndarray:
    """Row k is the reduced representation of zeta_r**k, k = 0..r-1."""
    n = phi(r)
    rows = np.zeros((r, n), dtype=np.int64)
    for k in range(r):
        rows[k] = _reduce([0] * k + [1], r)
    rows.setflags(write=False)
    return rows


def root(k: int, r: int) -> tuple[int, ...]:
    return tuple(int(v) for v in power_table(r)[k % r])


def mul(a, b, r: int) -> tuple[int, ...]:
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _reduce(prod, r)


def add(a, b) -> tuple[int, ...]:
    return tuple(int(x) + int(y) for x, y in zip(a, b))


def zero(r: int) -> tuple[int, ...]:
    return (0,) * phi(r)


def one(r: int) -> tuple[int, ...]:
    return root(0, r)


@lru_cache(maxsize=None)
def _basis_values(r: int) -> tuple[complex, ...]:
    return tuple(cmath.exp(2j * math.pi * j / r) for j in range(phi(r)))


def to_complex(a, r: int) -> complex:
    if r <= 2:
        return complex(int(a[0]))
    w = _basis_values(r)
    re = math.fsum(int(x) * v.real for x, v in zip(a, w))
    im = math.fsum(int(x) * v.imag for x, v in zip(a, w))
    return complex(re, im)


def embed(a, r: int, s: int) -> tuple[int, ...]:
    """Map an element of Z[zeta_r] into Z[zeta_s] (r must divide s)."""
    if s % r:
        raise ValueError(f"{r} does not divide {s}")
    if r == s:
        return tuple(int(v) for v in a)
    step = s // r
    out = zero(s)
    table = power_table(s)
    acc = np.zeros(len(out), dtype=object)
    for j, c in enumerate(a):
        if c:
            acc += int(c) * table[(j * step) % s].astype(object)
    return tuple(int(v) for v in acc)
