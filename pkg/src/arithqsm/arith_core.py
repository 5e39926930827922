"""Exact integer, modular and polynomial arithmetic.

Polynomials store coefficients low degree first, so ``coeffs[i]`` is the
coefficient of ``x**i``.  Everything here is immutable and uses Python ints,
so nothing overflows; the compiled kernels in :mod:`arithqsm.kernels` are
only used for the batch paths that need speed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InputError,
    IntegerTooLarge,
    NonMonic,
    NotPrime,
    ZeroPolynomial,
)

__all__ = [
    "Poly",
    "FpPoly",
    "factor_mod_p",
    "discriminant",
    "resultant",
    "kronecker_symbol",
    "factor_integer",
    "is_prime",
    "primes_up_to",
    "smallest_prime_factors",
]


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


# ---------------------------------------------------------------------------
# Polynomials over Z


@dataclass(frozen=True)
class Poly:
    """Integer polynomial in canonical trimmed form."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Iterable[int]):
        c = _trim([int(a) for a in coeffs])
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial has degree -1

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.lc == 1

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    def __neg__(self) -> "Poly":
        return Poly(-a for a in self.coeffs)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            return Poly(other * a for a in self.coeffs)
        return Poly(_mul_z(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def derivative(self) -> "Poly":
        return Poly(i * a for i, a in enumerate(self.coeffs) if i)

    def taylor_shift(self, c: int) -> "Poly":
        """Return ``f(x + c)``."""
        out = Poly(())
        xc = Poly((c, 1))
        for a in reversed(self.coeffs):
            out = out * xc + Poly((a,))
        return out

    def mod_p(self, p: int) -> "FpPoly":
        return FpPoly(p, self.coeffs)

    def content(self) -> int:
        g = 0
        for a in self.coeffs:
            g = math.gcd(g, a)
        return g

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            a = self.coeffs[i]
            if a == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(a) == 1:
                coef = "-" if a < 0 else "+"
                terms.append(f"{coef}{mono}")
            else:
                terms.append(f"{a:+d}{mono}")
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s


def _mul_z(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


# ---------------------------------------------------------------------------
# Polynomials over F_p (list helpers first, dataclass wrapper below)


def _mulmod_p(a: list[int], b: list[int], p: int) -> list[int]:
    return _trim([c % p for c in _mul_z(a, b)])


def _divmod_p(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    r = list(a)
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    if len(r) - 1 < db:
        return [], _trim(r)
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1 - db, -1, -1):
        c = r[k + db] * inv % p
        q[k] = c
        if c:
            for j in range(db + 1):
                r[k + j] = (r[k + j] - c * b[j]) % p
    return _trim(q), _trim(r[:db])


def _rem_p(a: list[int], b: list[int], p: int) -> list[int]:
    return _divmod_p(a, b, p)[1]


def _monic_p(a: list[int], p: int) -> list[int]:
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def _gcd_p(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _rem_p(a, b, p)
    return _monic_p(a, p)


def _powmod_p(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _rem_p(base, mod, p)
    while e:
        if e & 1:
            result = _rem_p(_mulmod_p(result, base, p), mod, p)
        e >>= 1
        if e:
            base = _rem_p(_mulmod_p(base, base, p), mod, p)
    return result


def _sub_p(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    return _trim(
        [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    )


def _deriv_p(a: list[int], p: int) -> list[int]:
    return _trim([(i * c) % p for i, c in enumerate(a)][1:])


@dataclass(frozen=True)
class FpPoly:
    """Polynomial over the prime field with ``p`` elements."""

    p: int
    coeffs: tuple[int, ...]

    def __init__(self, p: int, coeffs: Iterable[int]):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "coeffs", tuple(_trim([int(c) % p for c in coeffs])))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def _wrap(self, c: list[int]) -> "FpPoly":
        out = object.__new__(FpPoly)
        object.__setattr__(out, "p", self.p)
        object.__setattr__(out, "coeffs", tuple(c))
        return out

    def __mul__(self, other: "FpPoly") -> "FpPoly":
        return self._wrap(_mulmod_p(list(self.coeffs), list(other.coeffs), self.p))

    def __pow__(self, e: int) -> "FpPoly":
        out = self._wrap([1])
        for _ in range(e):
            out = out * self
        return out

    def __sub__(self, other: "FpPoly") -> "FpPoly":
        return self._wrap(_sub_p(list(self.coeffs), list(other.coeffs), self.p))

    def __divmod__(self, other: "FpPoly"):
        q, r = _divmod_p(list(self.coeffs), list(other.coeffs), self.p)
        return self._wrap(q), self._wrap(r)

    def gcd(self, other: "FpPoly") -> "FpPoly":
        return self._wrap(_gcd_p(list(self.coeffs), list(other.coeffs), self.p))

    def lift(self) -> Poly:
        """Lift to Z[x] with coefficients in ``[0, p)``."""
        return Poly(self.coeffs)

    def sort_key(self) -> tuple:
        return (self.degree, tuple(reversed(self.coeffs[:-1])) if self.coeffs else ())

    def __str__(self) -> str:
        return f"{Poly(self.coeffs)} (mod {self.p})"


def _sort_key(c: Sequence[int]) -> tuple:
    # degree first, then coefficients read from the top down
    return (len(c) - 1, tuple(reversed(c[:-1])))


def _squarefree_decomposition(f: list[int], p: int) -> list[tuple[list[int], int]]:
    out: list[tuple[list[int], int]] = []
    df = _deriv_p(f, p)
    if df:
        c = _gcd_p(f, df, p)
        w = _divmod_p(f, c, p)[0]
        i = 1
        while len(w) > 1:
            y = _gcd_p(w, c, p)
            fac = _divmod_p(w, y, p)[0]
            if len(fac) > 1:
                out.append((_monic_p(fac, p), i))
            w = y
            c = _divmod_p(c, y, p)[0]
            i += 1
        if len(c) > 1:
            root = c[::p]
            out.extend((g, m * p) for g, m in _squarefree_decomposition(root, p))
    else:
        root = f[::p]
        out.extend((g, m * p) for g, m in _squarefree_decomposition(root, p))
    return out


def _distinct_degree(f: list[int], p: int) -> list[tuple[list[int], int]]:
    out = []
    h = [0, 1]
    x = [0, 1]
    i = 1
    while len(f) - 1 >= 2 * i:
        h = _powmod_p(h, p, f, p)
        g = _gcd_p(f, _sub_p(h, x, p), p)
        if len(g) > 1:
            out.append((g, i))
            f = _divmod_p(f, g, p)[0]
            h = _rem_p(h, f, p)
        i += 1
    if len(f) > 1:
        out.append((_monic_p(f, p), len(f) - 1))
    return out


def _equal_degree(f: list[int], d: int, p: int, rng: random.Random) -> list[list[int]]:
    n = len(f) - 1
    if n == d:
        return [f]
    while True:
        a = _trim([rng.randrange(p) for _ in range(n)])
        if len(a) < 2:
            continue
        if p == 2:
            # trace map onto F_2
            t = b = _rem_p(a, f, p)
            for _ in range(d - 1):
                t = _rem_p(_mulmod_p(t, t, p), f, p)
                b = _sub_p(b, t, p)  # same as addition in characteristic 2
        else:
            b = _sub_p(_powmod_p(a, (p**d - 1) // 2, f, p), [1], p)
        g = _gcd_p(f, b, p)
        if 0 < len(g) - 1 < n:
            q = _divmod_p(f, g, p)[0]
            return _equal_degree(g, d, p, rng) + _equal_degree(_monic_p(q, p), d, p, rng)


def factor_mod_p(f: FpPoly) -> list[tuple[FpPoly, int]]:
    """Factor a monic polynomial over F_p into monic irreducibles.

    Returns ``[(factor, multiplicity), ...]`` sorted by degree and then by
    coefficients from the top down.  The random choices in the equal-degree
    step use a fixed seed, and the canonical sort makes the output
    independent of them anyway.
    """
    if not f.coeffs:
        raise ZeroPolynomial("cannot factor the zero polynomial")
    if not f.is_monic():
        raise NonMonic(f"{f} is not monic")
    p = f.p
    rng = random.Random(0x5EED ^ p)
    result: dict[tuple[int, ...], int] = {}
    for part, mult in _squarefree_decomposition(list(f.coeffs), p):
        for block, d in _distinct_degree(part, p):
            for g in _equal_degree(block, d, p, rng):
                key = tuple(g)
                result[key] = result.get(key, 0) + mult
    ordered = sorted(result.items(), key=lambda kv: _sort_key(kv[0]))
    return [(f._wrap(list(g)), m) for g, m in ordered]


def ddf_pattern(coeffs: Sequence[int], p: int) -> list[int]:
    """Degrees of the irreducible factors of a squarefree monic polynomial mod p.

    Pure-Python reference for the compiled kernel of the same name.
    """
    f = _trim([c % p for c in coeffs])
    degs: list[int] = []
    for g, d in _distinct_degree(f, p):
        degs.extend([d] * ((len(g) - 1) // d))
    return sorted(degs)


# ---------------------------------------------------------------------------
# Resultants and discriminants


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f: Poly, g: Poly) -> int:
    """Resultant of two integer polynomials via the Sylvester determinant."""
    m, n = f.degree, g.degree
    if m < 0 or n < 0:
        return 0
    if m == 0:
        return f.lc**n
    if n == 0:
        return g.lc**m
    size = m + n
    fa = list(reversed(f.coeffs))
    ga = list(reversed(g.coeffs))
    rows = []
    for i in range(n):
        rows.append([0] * i + fa + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + ga + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(f: Poly) -> int:
    if not f.is_monic():
        raise NonMonic(f"{f} is not monic")
    n = f.degree
    if n < 1:
        raise InputError("discriminant needs degree >= 1")
    if n == 1:
        return 1
    r = resultant(f, f.derivative())
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * r // f.lc


# ---------------------------------------------------------------------------
# Integers


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers a, n."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    s = 1
    if n < 0:
        n = -n
        if a < 0:
            s = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            s = -s
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                s = -s
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            s = -s
        a %= n
    return s if n == 1 else 0


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; the base set is a proof for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, seed: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(seed)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factor_integer(n: int) -> list[tuple[int, int]]:
    """Prime factorization ``[(p, e), ...]`` sorted by p, for 1 <= n < 2**64."""
    n = int(n)
    if n < 1:
        raise InputError("factor_integer needs n >= 1")
    if n >= 1 << 64:
        raise IntegerTooLarge("factor_integer is limited to n < 2**64")
    counts: dict[int, int] = {}
    for q in range(2, 1000):
        if q * q > n:
            break
        while n % q == 0:
            counts[q] = counts.get(q, 0) + 1
            n //= q
    stack = [n] if n > 1 else []
    seed = 1
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        d = _pollard_brent(m, seed)
        seed += 1
        stack.extend((d, m // d))
    return sorted(counts.items())


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return [int(v) for v in np.flatnonzero(sieve)]


@lru_cache(maxsize=8)
def smallest_prime_factors(n: int) -> np.ndarray:
    """``spf[k]`` is the least prime dividing k (``spf[0] = spf[1] = 0``)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i::i][spf[i::i] == 0] = i
    spf.setflags(write=False)
    return spf


def rational_roots(f: Poly) -> list[Fraction]:
    """Rational roots of a monic integer polynomial (they are integers)."""
    if not f.is_monic():
        raise NonMonic(f"{f} is not monic")
    c0 = f.coeffs[0] if f.coeffs else 0
    roots = []
    if c0 == 0:
        roots.append(Fraction(0))
        # strip the factor x and keep going for the remaining roots
        k = 0
        while f.coeffs[k] == 0:
            k += 1
        f = Poly(f.coeffs[k:])
        c0 = f.coeffs[0]
        if f.degree == 0:
            return roots
    divs = [1]
    for q, e in factor_integer(abs(c0)):
        divs = [d * q**k for d in divs for k in range(e + 1)]
    for r in sorted(s * d for d in divs for s in (1, -1)):
        if f(r) == 0:
            roots.append(Fraction(r))
    return sorted(roots)
