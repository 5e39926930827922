"""Exact Dirichlet-series coefficients: Dedekind zeta, twists, convolution.

Coefficients are exact.  Integer series (character order 1 or 2) are stored
as a 1-D int64 array; series with values in Z[zeta_r], r > 2, as a 2-D array
whose rows are power-basis vectors (see :mod:`arithqsm.cyclo`).  Index 0 is
unused.  An index n is *masked* when some prime of the mask divides it; the
stored value there is 0 and carries no information.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cyclo, kernels
from .arith_core import kronecker_symbol, primes_up_to, smallest_prime_factors
from .errors import (
    BetaOutOfRange,
    InputError,
    LimitMismatch,
    ReduciblePolynomial,
    SqrtInField,
    UndeterminedPrime,
)
from .number_field import (
    NumberField,
    SplittingType,
    Undetermined,
    new_field,
    prime_divisors,
    splitting_type,
)

MAX_LIMIT = 10**6


# ---------------------------------------------------------------------------
# Series container


@dataclass(frozen=True, eq=False)
class CoeffSeries:
    limit: int
    values: np.ndarray
    order: int = 1
    mask: frozenset[int] = frozenset()
    label: str = ""

    def __post_init__(self):
        if self.values.shape[0] != self.limit + 1:
            raise InputError("values must have length limit + 1")
        self.values.setflags(write=False)

    @property
    def is_integer(self) -> bool:
        return self.values.ndim == 1

    @property
    def present(self) -> np.ndarray:
        return presence(self.limit, self.mask)

    def is_masked(self, n: int) -> bool:
        return any(n % p == 0 for p in self.mask)

    def __getitem__(self, n: int):
        """Exact value at n; ``None`` when n is masked."""
        if not 1 <= n <= self.limit:
            raise IndexError(n)
        if self.is_masked(n):
            return None
        v = self.values[n]
        return int(v) if self.is_integer else tuple(int(c) for c in v)

    def to_list(self) -> list:
        return [self[n] for n in range(1, self.limit + 1)]

    def complex_value(self, n: int) -> complex:
        v = self[n]
        if v is None:
            return 0j
        return complex(v) if self.is_integer else cyclo.to_complex(v, self.order)


def presence(limit: int, mask: Iterable[int]) -> np.ndarray:
    ok = np.ones(limit + 1, dtype=bool)
    ok[0] = False
    for p in mask:
        ok[p::p] = False
    return ok


def _integer_width(order: int) -> bool:
    return order <= 2


def delta_series(limit: int) -> CoeffSeries:
    v = np.zeros(limit + 1, dtype=np.int64)
    v[1] = 1
    return CoeffSeries(limit, v, label="delta")


def _check_limit(limit: int) -> None:
    if not 1 <= limit <= MAX_LIMIT:
        raise InputError(f"limit must be in [1, {MAX_LIMIT}]")


# ---------------------------------------------------------------------------
# Local data and Dedekind zeta


def local_ideal_count(st: SplittingType | Sequence[tuple[int, int]], k: int) -> int:
    """Number of ideals of norm p**k given the splitting type at p."""
    if k < 0:
        raise InputError("exponent must be >= 0")
    return local_ideal_counts(st, k)[k]


def local_ideal_counts(st: SplittingType | Sequence[tuple[int, int]], kmax: int) -> list[int]:
    # counts solutions of sum f_i x_i = k; ramification indices play no role
    ways = [1] + [0] * kmax
    for _, f in st:
        for k in range(f, kmax + 1):
            ways[k] += ways[k - f]
    return ways


def _splitting_batch(K: NumberField, primes: Sequence[int], threads: int):
    if threads <= 1 or len(primes) < 64:
        return [splitting_type(K, p) for p in primes]
    chunk = math.ceil(len(primes) / threads)
    parts = [primes[i : i + chunk] for i in range(0, len(primes), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        done = pool.map(lambda ps: [splitting_type(K, p) for p in ps], parts)
    # pool.map preserves submission order, so the merge is deterministic
    return [st for part in done for st in part]


def zeta_coeffs(
    K: NumberField,
    limit: int,
    *,
    exclude: Iterable[int] = (),
    policy: str = "auto",
    threads: int = 1,
) -> CoeffSeries:
    """a_n = number of integral ideals of norm n, for n <= limit.

    Primes whose splitting is undetermined join the mask under the ``auto``
    policy and raise :class:`UndeterminedPrime` under ``strict``.  Primes in
    ``exclude`` are masked unconditionally.
    """
    _check_limit(limit)
    if policy not in ("auto", "strict"):
        raise InputError(f"unknown mask policy {policy!r}")
    primes = primes_up_to(limit)
    types = _splitting_batch(K, primes, threads)
    excluded = {int(p) for p in exclude}
    undetermined = [p for p, st in zip(primes, types) if isinstance(st, Undetermined) and p not in excluded]
    if undetermined and policy == "strict":
        raise UndeterminedPrime(undetermined)
    mask = excluded | set(undetermined)
    offsets = np.full(limit + 1, -1, dtype=np.int64)
    local: list[int] = []
    for p, st in zip(primes, types):
        if p in mask:
            continue
        kmax = int(math.log(limit, p)) + 1
        offsets[p] = len(local)
        local.extend(local_ideal_counts(st, kmax))
    spf = smallest_prime_factors(limit)
    a = kernels.assemble_multiplicative(spf, offsets, np.array(local or [0], dtype=np.int64))
    return CoeffSeries(limit, a, 1, frozenset(p for p in mask if p <= limit), K.label)


# ---------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class DirichletChar:
    """Character mod m with values zeta_r**exps[n % m]; exps = -1 off (Z/m)*."""

    modulus: int
    order: int
    exps: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if self.modulus < 1 or self.order < 1:
            raise InputError("modulus and order must be positive")
        if len(self.exps) != self.modulus:
            raise InputError("exponent table must have one entry per residue")
        if self.exps[1 % self.modulus] != 0:
            raise InputError("chi(1) must be 1")
        for a, e in enumerate(self.exps):
            unit = math.gcd(a, self.modulus) == 1
            if unit != (e >= 0) or e >= self.order:
                raise InputError(f"bad exponent {e} at residue {a}")

    def exponent(self, n: int) -> int | None:
        e = self.exps[n % self.modulus]
        return None if e < 0 else e

    def value(self, n: int) -> tuple[int, ...]:
        e = self.exponent(n)
        return cyclo.zero(self.order) if e is None else cyclo.root(e, self.order)

    def __call__(self, n: int) -> complex:
        e = self.exponent(n)
        if e is None:
            return 0j
        if self.order <= 2:
            return complex((-1) ** e)
        return cyclo.to_complex(cyclo.root(e, self.order), self.order)

    def conductor_primes(self) -> list[int]:
        return prime_divisors(self.modulus) if self.modulus > 1 else []

    def is_multiplicative(self) -> bool:
        """Exhaustive check of chi(ab) = chi(a) chi(b) on units."""
        m, r = self.modulus, self.order
        units = [a for a in range(m) if self.exps[a] >= 0]
        for a in units:
            ea = self.exps[a]
            for b in units:
                if self.exps[a * b % m] != (ea + self.exps[b]) % r:
                    return False
        return True


def trivial_char() -> DirichletChar:
    return DirichletChar(1, 1, (0,), "trivial")


def kronecker_char(D: int) -> DirichletChar:
    """n -> (D/n) for a fundamental discriminant D, as a character mod |D|."""
    if not is_fundamental_discriminant(D):
        raise InputError(f"{D} is not a fundamental discriminant")
    if D == 1:
        return trivial_char()
    m = abs(D)
    exps = []
    for a in range(m):
        k = kronecker_symbol(D, a) if a else kronecker_symbol(D, m)
        exps.append(-1 if k == 0 else (0 if k == 1 else 1))
    return DirichletChar(m, 2, tuple(exps), f"chi_{D}")


def char_from_function(m: int, r: int, fn: Callable[[int], int | None], name: str = "") -> DirichletChar:
    exps = []
    for a in range(m):
        e = fn(a) if math.gcd(a, m) == 1 else None
        exps.append(-1 if e is None else int(e) % r)
    return DirichletChar(m, r, tuple(exps), name)


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True
    if D == 0:
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    from .arith_core import factor_integer

    return all(e == 1 for _, e in factor_integer(n))


def fundamental_discriminants(bound: int) -> list[int]:
    """Fundamental discriminants D != 1 with |D| <= bound, sorted by |D| then sign."""
    out = [D for a in range(2, bound + 1) for D in (-a, a) if is_fundamental_discriminant(D)]
    return out


# ---------------------------------------------------------------------------
# Twists and convolution


def _as_cyclo(series: CoeffSeries, order: int) -> np.ndarray:
    """Values of ``series`` as an object array of power-basis tuples in Z[zeta_order]."""
    n = series.limit
    out = np.empty(n + 1, dtype=object)
    for k in range(n + 1):
        if series.is_integer:
            v = int(series.values[k])
            out[k] = cyclo.mul((v,), cyclo.one(order), order) if order > 2 else (v,)
        else:
            out[k] = cyclo.embed(series.values[k], series.order, order)
    return out


def _pack(limit: int, order: int, rows) -> np.ndarray:
    if _integer_width(order):
        return np.array([int(r[0]) for r in rows], dtype=np.int64)
    return np.array([list(r) for r in rows], dtype=np.int64).reshape(limit + 1, cyclo.phi(order))


def _common_order(a: int, b: int) -> int:
    r = math.lcm(a, b)
    # an order-2 value is +-1, which already lives in Z
    return r


def twist_coeffs(z: CoeffSeries, chi: DirichletChar, *, mask_conductor: bool = True) -> CoeffSeries:
    """c_n = a_n * chi(n), with c_n = 0 when gcd(n, m) > 1.

    With ``mask_conductor`` (default) the primes dividing the modulus also
    join the mask, because the modulus can exceed the conductor of the
    restricted character over K and the zeros there are then a convention,
    not data.  Pass False when the modulus is known to be the conductor.
    """
    order = _common_order(z.order, chi.order)
    m = chi.modulus
    n = z.limit
    idx = np.arange(n + 1) % m
    exps = np.array(chi.exps, dtype=np.int64)[idx]
    mask = set(z.mask)
    if mask_conductor:
        mask |= set(chi.conductor_primes())
    if z.is_integer and _integer_width(order):
        signs = np.where(exps < 0, 0, np.where(exps == 1, -1, 1)) if chi.order == 2 else (exps >= 0).astype(np.int64)
        vals = z.values * signs
    else:
        base = _as_cyclo(z, order)
        step = order // chi.order
        rows = []
        for k in range(n + 1):
            e = int(exps[k])
            if e < 0:
                rows.append(cyclo.zero(order))
            else:
                rows.append(cyclo.mul(base[k], cyclo.root(e * step, order), order))
        vals = _pack(n, order, rows)
    vals = _zero_masked(vals, n, mask)
    return CoeffSeries(n, vals, order, frozenset(p for p in mask if p <= n), f"{z.label}*{chi.name}")


def _zero_masked(vals: np.ndarray, limit: int, mask) -> np.ndarray:
    vals = np.array(vals, copy=True)
    keep = presence(limit, mask)
    keep[0] = True
    vals[~keep] = 0
    return vals


def dirichlet_convolve(u: CoeffSeries, v: CoeffSeries) -> CoeffSeries:
    """(u * v)_n = sum over d | n of u_d v_{n/d}; masks are united."""
    if u.limit != v.limit:
        raise LimitMismatch(f"limits differ: {u.limit} vs {v.limit}")
    n = u.limit
    mask = u.mask | v.mask
    order = _common_order(u.order, v.order)
    if u.is_integer and v.is_integer and _integer_width(order):
        w = kernels.dirichlet_convolve(
            np.ascontiguousarray(u.values, dtype=np.int64),
            np.ascontiguousarray(v.values, dtype=np.int64),
        )
    else:
        uu, vv = _as_cyclo(u, order), _as_cyclo(v, order)
        acc = [cyclo.zero(order) for _ in range(n + 1)]
        for d in range(1, n + 1):
            if any(uu[d]):
                for m in range(1, n // d + 1):
                    if any(vv[m]):
                        acc[d * m] = cyclo.add(acc[d * m], cyclo.mul(uu[d], vv[m], order))
        w = _pack(n, order, acc)
    w = _zero_masked(w, n, mask)
    return CoeffSeries(n, w, order, mask, f"({u.label})*({v.label})")


# ---------------------------------------------------------------------------
# Comparisons


@dataclass(frozen=True)
class SeriesComparison:
    equal: bool
    first_mismatch: int | None
    masked: frozenset[int]
    limit: int
    compared: int
    left: object = None
    right: object = None


def compare_series(u: CoeffSeries, v: CoeffSeries, *, coprime_to: Iterable[int] = ()) -> SeriesComparison:
    """Compare on indices unmasked for both series (and coprime to ``coprime_to``)."""
    if u.limit != v.limit:
        raise LimitMismatch(f"limits differ: {u.limit} vs {v.limit}")
    masked = frozenset(u.mask | v.mask | {int(p) for p in coprime_to})
    ok = presence(u.limit, masked)
    order = _common_order(u.order, v.order)
    if u.is_integer and v.is_integer:
        diff = (u.values != v.values) & ok
    else:
        uu, vv = _as_cyclo(u, order), _as_cyclo(v, order)
        diff = np.array([bool(ok[k]) and uu[k] != vv[k] for k in range(u.limit + 1)])
    bad = np.flatnonzero(diff)
    first = int(bad[0]) if bad.size else None
    return SeriesComparison(
        equal=first is None,
        first_mismatch=first,
        masked=masked,
        limit=u.limit,
        compared=int(ok.sum()),
        left=None if first is None else u[first],
        right=None if first is None else v[first],
    )


def equiv_check(K: NumberField, L: NumberField, limit: int, *, exclude: Iterable[int] = (), threads: int = 1) -> SeriesComparison:
    zk = zeta_coeffs(K, limit, exclude=exclude, threads=threads)
    zl = zeta_coeffs(L, limit, exclude=exclude, threads=threads)
    return compare_series(zk, zl)


# ---------------------------------------------------------------------------
# Floating sums


def weight(n: int, beta: float) -> float:
    """n ** -beta; every route that sums Dirichlet terms goes through here."""
    return float(n) ** -beta


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 1.0 or math.isinf(beta) or math.isnan(beta):
        raise BetaOutOfRange(f"beta must be > 1, got {beta}")
    return beta


def series_sum(terms: Iterable[tuple[int, object]], beta: float, order: int = 1) -> complex | float:
    """Correctly rounded sum of value(n) * n**-beta over the given terms.

    Terms are (n, exact value) in ascending n; integer values for order <= 2,
    power-basis tuples otherwise.  Uses math.fsum, so the result does not
    depend on accumulation error, only on the multiset of float terms.
    """
    beta = check_beta(beta)
    if _integer_width(order):
        return math.fsum(float(v) * weight(n, beta) for n, v in terms if v)
    re, im = [], []
    for n, v in terms:
        if any(v):
            c = cyclo.to_complex(v, order)
            w = weight(n, beta)
            re.append(c.real * w)
            im.append(c.imag * w)
    return complex(math.fsum(re), math.fsum(im))


def partial_sum(z: CoeffSeries, beta: float) -> complex | float:
    """sum over unmasked n <= N of a_n n**-beta (beta > 1)."""
    check_beta(beta)
    ok = z.present
    terms = ((n, z[n]) for n in range(1, z.limit + 1) if ok[n])
    return series_sum(terms, beta, z.order if not z.is_integer else 1)


# ---------------------------------------------------------------------------
# Composita and Artin factorization


def compositum_poly(f, D: int):
    """Characteristic polynomial of theta + sqrt(D): f(x + s) f(x - s) with s^2 = D.

    This equals the resultant Res_y(f(y), (x - y)^2 - D).
    """
    from .arith_core import Poly

    coeffs = f.coeffs
    n = len(coeffs) - 1
    # f(x + s) = A(x) + s B(x)
    A = [0] * (n + 1)
    B = [0] * (n + 1)
    for k, c in enumerate(coeffs):
        if not c:
            continue
        for j in range(k + 1):
            term = c * math.comb(k, j) * D ** (j // 2)
            if j % 2:
                B[k - j] += term
            else:
                A[k - j] += term
    PA, PB = Poly(A), Poly(B)
    return PA * PA - (PB * PB) * D


def compositum_field(K: NumberField, D: int, label: str | None = None) -> NumberField:
    """K(sqrt D); raises SqrtInField when sqrt(D) already lies in K."""
    try:
        return new_field(label or f"{K.label}(sqrt{D})", compositum_poly(K.poly, D))
    except ReduciblePolynomial as exc:
        raise SqrtInField(f"sqrt({D}) lies in {K.label}") from exc


def artin_factorization_check(K: NumberField, D: int, limit: int) -> SeriesComparison:
    """Compare zeta_{K(sqrt D)} with zeta_K * L_K(chi_D) coefficientwise."""
    chi = kronecker_char(D)
    zk = zeta_coeffs(K, limit)
    rhs = dirichlet_convolve(zk, twist_coeffs(zk, chi))
    lhs = zeta_coeffs(compositum_field(K, D), limit)
    return compare_series(lhs, rhs)


# ---------------------------------------------------------------------------
# CSV


def series_to_csv(z: CoeffSeries) -> str:
    buf = io.StringIO()
    mask = ",".join(str(p) for p in sorted(z.mask)) or "none"
    buf.write(f"# field={z.label} N={z.limit} order={z.order} mask={mask}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "a_n"])
    for n in range(1, z.limit + 1):
        v = z[n]
        if v is None:
            w.writerow([n, "masked"])
        elif isinstance(v, tuple):
            w.writerow([n, " ".join(str(c) for c in v)])
        else:
            w.writerow([n, v])
    return buf.getvalue()
