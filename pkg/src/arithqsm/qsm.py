"""Truncated model of the ideal-indexed Hilbert space with its time evolution.

The basis is every integral ideal of norm <= N.  The Hamiltonian is
diagonal with eigenvalue log N(n), so e^{-beta H} has trace sum N(n)^-beta.
Operators are built from diagonal functions, the shifts mu_n (eps_m ->
eps_{nm}) and their adjoints.

Truncation: a shift whose target leaves the cutoff annihilates the vector.
Products are normal ordered first (mu_n* mu_m -> mu_{m/g} mu_{n/g}*, g the
gcd) so that relations of the infinite system, such as mu_n* mu_n = 1, hold
exactly and only the remaining truncation error shows up in KMS defects.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cyclo
from .arith_core import primes_up_to
from .class_group import ClassCharacter, ClassGroup, class_char_L_coeffs, prime_form
from .errors import DiscriminantMismatch, InputError, UndeterminedPrime
from .lseries import (
    DirichletChar,
    _check_limit,
    check_beta,
    series_sum,
    twist_coeffs,
    zeta_coeffs,
)
from .number_field import NumberField, Undetermined, splitting_type

__all__ = [
    "IdealVec",
    "TruncatedQSM",
    "Diagonal",
    "Shift",
    "Product",
    "Operator",
    "mu",
    "mu_star",
    "projection",
    "enumerate_ideals",
    "partition_function",
    "spectrum_equal",
    "gibbs_expectation",
    "time_evolve",
    "kms_defect",
    "kms_state_value",
    "kms_class_value",
    "KMSValue",
    "undetermined_primes",
]

PrimeLabel = tuple[int, int, int]  # (p, index within the splitting type, f)


# ---------------------------------------------------------------------------
# Ideals


@dataclass(frozen=True, order=True)
class IdealVec:
    """Integral ideal as exponents on prime-ideal labels (p, index, f)."""

    exps: tuple[tuple[PrimeLabel, int], ...] = ()

    def __post_init__(self):
        if any(e < 1 for _, e in self.exps):
            raise InputError("exponents must be >= 1")
        if list(self.exps) != sorted(self.exps):
            object.__setattr__(self, "exps", tuple(sorted(self.exps)))

    @classmethod
    def from_map(cls, m: dict[PrimeLabel, int]) -> "IdealVec":
        return cls(tuple(sorted((tuple(k), int(e)) for k, e in m.items() if e)))

    @classmethod
    def prime(cls, label: PrimeLabel, e: int = 1) -> "IdealVec":
        return cls(((tuple(label), e),))

    def as_map(self) -> dict[PrimeLabel, int]:
        return dict(self.exps)

    @property
    def norm(self) -> int:
        out = 1
        for (p, _, f), e in self.exps:
            out *= p ** (f * e)
        return out

    def is_unit(self) -> bool:
        return not self.exps

    def __mul__(self, other: "IdealVec") -> "IdealVec":
        m = Counter(self.as_map())
        m.update(other.as_map())
        return IdealVec.from_map(m)

    def divides(self, other: "IdealVec") -> bool:
        om = other.as_map()
        return all(om.get(k, 0) >= e for k, e in self.exps)

    def quotient(self, d: "IdealVec") -> "IdealVec | None":
        """self / d, or None when d does not divide self."""
        m = self.as_map()
        for k, e in d.exps:
            r = m.get(k, 0) - e
            if r < 0:
                return None
            m[k] = r
        return IdealVec.from_map(m)

    def gcd(self, other: "IdealVec") -> "IdealVec":
        om = other.as_map()
        return IdealVec.from_map({k: min(e, om.get(k, 0)) for k, e in self.exps})

    def __str__(self) -> str:
        if not self.exps:
            return "(1)"
        return "*".join(f"P{p}_{i}" + (f"^{e}" if e > 1 else "") for (p, i, _), e in self.exps)


UNIT = IdealVec()


# ---------------------------------------------------------------------------
# Enumeration


def undetermined_primes(K: NumberField, limit: int) -> set[int]:
    return {int(p) for p in primes_up_to(limit) if isinstance(splitting_type(K, int(p)), Undetermined)}


@dataclass(frozen=True, eq=False)
class TruncatedQSM:
    field: NumberField
    cutoff: int
    basis: tuple[IdealVec, ...]
    norms: np.ndarray
    mask: frozenset[int]
    _weights: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.norms.setflags(write=False)

    @property
    def spectrum(self) -> np.ndarray:
        return np.log(self.norms.astype(float))

    @property
    def size(self) -> int:
        return len(self.basis)

    def index(self, ideal: IdealVec) -> int | None:
        return self._index.get(ideal)

    @property
    def _index(self) -> dict[IdealVec, int]:
        try:
            return self._weights["_index"]
        except KeyError:
            idx = {v: i for i, v in enumerate(self.basis)}
            with self._lock:
                return self._weights.setdefault("_index", idx)

    def norm_counts(self) -> dict[int, int]:
        return dict(Counter(int(n) for n in self.norms))

    def weights(self, beta: float) -> np.ndarray:
        """N(n)^-beta per basis vector (cached per beta)."""
        beta = check_beta(beta)
        key = ("w", beta)
        w = self._weights.get(key)
        if w is None:
            w = np.array([float(n) ** -beta for n in self.norms])
            w.setflags(write=False)
            with self._lock:
                w = self._weights.setdefault(key, w)
        return w

    def primes(self) -> list[IdealVec]:
        return [v for v in self.basis if len(v.exps) == 1 and v.exps[0][1] == 1]


def enumerate_ideals(
    K: NumberField, limit: int, *, exclude: Iterable[int] = (), policy: str = "auto"
) -> TruncatedQSM:
    """All integral ideals of norm <= limit, sorted by (norm, label).

    Primes with undetermined splitting are masked (``auto``) or reported via
    UndeterminedPrime (``strict``); masked and excluded primes generate
    nothing, so every norm divisible by them is absent.
    """
    _check_limit(limit)
    if policy not in ("auto", "strict"):
        raise InputError(f"unknown mask policy {policy!r}")
    excluded = {int(p) for p in exclude}
    gens: list[tuple[int, PrimeLabel]] = []
    undetermined = []
    for p in primes_up_to(limit):
        p = int(p)
        if p in excluded:
            continue
        st = splitting_type(K, p)
        if isinstance(st, Undetermined):
            undetermined.append(p)
            continue
        for i, (_, f) in enumerate(st.pairs):
            q = p**f
            if q <= limit:
                gens.append((q, (p, i, f)))
    if undetermined and policy == "strict":
        raise UndeterminedPrime(undetermined)
    gens.sort()

    out: list[tuple[int, tuple]] = [(1, ())]

    def descend(start: int, norm: int, exps: tuple):
        for j in range(start, len(gens)):
            q, lab = gens[j]
            if norm * q > limit:
                break  # gens are sorted by norm
            n, e = norm * q, 1
            while n <= limit:
                new = exps + ((lab, e),)
                out.append((n, new))
                descend(j + 1, n, new)
                n *= q
                e += 1

    descend(0, 1, ())
    out.sort(key=lambda t: (t[0], tuple(sorted(t[1]))))
    basis = tuple(IdealVec(tuple(sorted(ex))) for _, ex in out)
    norms = np.array([n for n, _ in out], dtype=np.int64)
    mask = frozenset(p for p in excluded | set(undetermined) if p <= limit)
    return TruncatedQSM(K, limit, basis, norms, mask)


def _grouped_by_norm(q: TruncatedQSM, values: Sequence, order: int):
    """Exact per-norm sums of per-ideal values, ascending norm."""
    acc: dict[int, object] = {}
    for n, v in zip(q.norms, values):
        n = int(n)
        if order <= 2:
            acc[n] = acc.get(n, 0) + int(v)
        else:
            acc[n] = cyclo.add(acc[n], v) if n in acc else tuple(v)
    return sorted(acc.items())


def partition_function(q: TruncatedQSM, beta: float) -> float:
    """Tr e^{-beta H} = sum over the basis of N(n)^-beta.

    Terms are grouped by norm and summed with the same correctly rounded
    routine as the coefficient route, so both routes agree bit for bit.
    """
    beta = check_beta(beta)
    return series_sum(_grouped_by_norm(q, [1] * q.size, 1), beta)


def spectrum_equal(K: NumberField, L: NumberField, limit: int, *, exclude: Iterable[int] = ()) -> bool:
    """Exact multiset equality of ideal norms <= limit on a shared mask."""
    mask = set(exclude) | undetermined_primes(K, limit) | undetermined_primes(L, limit)
    a = enumerate_ideals(K, limit, exclude=mask)
    b = enumerate_ideals(L, limit, exclude=mask)
    return np.array_equal(a.norms, b.norms)


# ---------------------------------------------------------------------------
# Operators


class Operator:
    def apply(self, q: TruncatedQSM, v: IdealVec) -> tuple[complex, IdealVec] | None:
        raise NotImplementedError

    def __matmul__(self, other: "Operator") -> "Product":
        return Product((self, other))


@dataclass(frozen=True)
class Diagonal(Operator):
    """Multiplication by fn(ideal); fixed by the time evolution."""

    fn: Callable[[IdealVec], complex]
    name: str = "f"

    def apply(self, q, v):
        return complex(self.fn(v)), v


IDENTITY = Diagonal(lambda v: 1.0, "1")


@dataclass(frozen=True)
class Shift(Operator):
    """mu_n (adjoint=False) or mu_n* with accumulated (complex) time t.

    The time evolution multiplies mu_n by N(n)^{it} and mu_n* by N(n)^{-it};
    the time is stored rather than the scalar so the group law is exact.
    """

    ideal: IdealVec
    adjoint: bool = False
    time: complex = 0j

    def scale_polar(self) -> tuple[float, float]:
        """(modulus, phase) of the time-evolution factor."""
        logn = math.log(self.ideal.norm)
        sign = -1.0 if self.adjoint else 1.0
        t = complex(self.time)
        # N^{i s t} = exp(i s Re t log N) * exp(-s Im t log N)
        return math.exp(-sign * t.imag * logn), sign * t.real * logn

    def scale(self) -> complex:
        r, phi = self.scale_polar()
        return 1.0 + 0j if r == 1.0 and phi == 0.0 else cmath.rect(r, phi)

    def apply(self, q, v):
        s = self.scale()
        if self.adjoint:
            w = v.quotient(self.ideal)
            return None if w is None else (s, w)
        w = v * self.ideal
        return None if w.norm > q.cutoff else (s, w)

    def star(self) -> "Shift":
        return Shift(self.ideal, not self.adjoint, complex(self.time).conjugate())


def mu(ideal: IdealVec) -> Shift:
    return Shift(ideal)


def mu_star(ideal: IdealVec) -> Shift:
    return Shift(ideal, adjoint=True)


def projection(ideal: IdealVec) -> "Product":
    """e_n = mu_n mu_n*, the projection onto ideals divisible by n."""
    return Product((mu(ideal), mu_star(ideal)))


@dataclass(frozen=True)
class Product(Operator):
    """Ordered product; factors act right to left."""

    factors: tuple[Operator, ...]

    def normal_ordered(self) -> "Product":
        fs: list[Operator] = []
        for f in self.factors:
            fs.extend(f.normal_ordered().factors if isinstance(f, Product) else [f])
        changed = True
        while changed:
            changed = False
            for i in range(len(fs) - 1):
                a, b = fs[i], fs[i + 1]
                if not (isinstance(a, Shift) and isinstance(b, Shift)):
                    continue
                if a.adjoint and not b.adjoint:
                    # mu_n* mu_m = mu_{m/g} mu_{n/g}*, time factors carried along
                    g = a.ideal.gcd(b.ideal)
                    mid = _scalar(a.scale() * b.scale())
                    repl = [mid] if mid is not None else []
                    bm, an = b.ideal.quotient(g), a.ideal.quotient(g)
                    if not bm.is_unit():
                        repl.append(Shift(bm))
                    if not an.is_unit():
                        repl.append(Shift(an, adjoint=True))
                    fs[i : i + 2] = repl
                    changed = True
                    break
                if a.adjoint == b.adjoint and a.time == 0 and b.time == 0:
                    fs[i : i + 2] = [Shift(a.ideal * b.ideal, a.adjoint)]
                    changed = True
                    break
        return Product(tuple(fs))

    def apply(self, q, v):
        s = 1.0 + 0j
        for f in reversed(self.factors):
            r = f.apply(q, v)
            if r is None:
                return None
            c, v = r
            s *= c
        return s, v


def _scalar(c: complex) -> Diagonal | None:
    if c == 1:
        return None
    return Diagonal(lambda v, c=c: c, f"{c}")


def _normal(op: Operator) -> Operator:
    return op.normal_ordered() if isinstance(op, Product) else op


def time_evolve(op: Operator, t: complex) -> Operator:
    """sigma_t: mu_n -> N(n)^{it} mu_n, mu_n* -> N(n)^{-it} mu_n*, f -> f."""
    if isinstance(op, Shift):
        return Shift(op.ideal, op.adjoint, complex(op.time) + t)
    if isinstance(op, Product):
        return Product(tuple(time_evolve(f, t) for f in op.factors))
    return op


def _trace(q: TruncatedQSM, op: Operator, beta: float) -> complex:
    op = _normal(op)
    w = q.weights(beta)
    re, im = [], []
    for i, v in enumerate(q.basis):
        r = op.apply(q, v)
        if r is None or r[1] != v:
            continue
        c = r[0] * w[i]
        re.append(c.real)
        im.append(c.imag)
    return complex(math.fsum(re), math.fsum(im))


def gibbs_expectation(q: TruncatedQSM, op: Operator, beta: float) -> complex:
    """Tr(op e^{-beta H}) / Tr(e^{-beta H}) on the truncated basis."""
    beta = check_beta(beta)
    return _trace(q, op, beta) / partition_function(q, beta)


def kms_defect(q: TruncatedQSM, a: Operator, b: Operator, beta: float) -> float:
    """|omega(ab) - omega(b sigma_{i beta}(a))| for the truncated Gibbs state."""
    beta = check_beta(beta)
    lhs = gibbs_expectation(q, Product((a, b)), beta)
    rhs = gibbs_expectation(q, Product((b, time_evolve(a, 1j * beta))), beta)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# KMS states as normalized L-series


@dataclass(frozen=True)
class KMSValue:
    route_a: complex
    route_b: complex

    @property
    def diff(self) -> float:
        return abs(self.route_a - self.route_b)

    @property
    def value(self) -> complex:
        return self.route_a


def _inverse_root(e: int, order: int) -> tuple[int, ...]:
    return cyclo.root(-e, order) if order > 2 else (1 if e % 2 == 0 else -1,)


def _mul(a, b, order: int):
    if order <= 2:
        return (int(a[0]) * int(b[0]),)
    return cyclo.mul(a, b, order)


def kms_state_value(q: TruncatedQSM, chi: DirichletChar, gamma: int, beta: float) -> KMSValue:
    """omega_{beta,gamma}(f_chi) with f_chi(n) = chi(N n) chi(gamma)^-1.

    Route A traces f_chi over the basis; route B rescales the twisted zeta
    coefficients.  Both sum identical exact per-norm values with the same
    rounding, so they agree exactly at equal cutoff.
    """
    beta = check_beta(beta)
    m, r = chi.modulus, chi.order
    eg = chi.exponent(gamma)
    if eg is None:
        raise InputError(f"gamma = {gamma} is not a unit mod {m}")
    ginv = _inverse_root(eg, r)
    Z = partition_function(q, beta)
    width = 1 if r <= 2 else cyclo.phi(r)
    zero = (0,) * width

    def chi_val(n: int):
        e = chi.exponent(n)
        if e is None:
            return zero
        return (1 if e % 2 == 0 else -1,) if r <= 2 else cyclo.root(e, r)

    per_ideal = [_mul(chi_val(int(n)), ginv, r) for n in q.norms]
    if r <= 2:
        per_ideal = [v[0] for v in per_ideal]
    route_a = series_sum(_grouped_by_norm(q, per_ideal, r), beta, r) / Z

    z = zeta_coeffs(q.field, q.cutoff, exclude=q.mask)
    tw = twist_coeffs(z, chi)
    terms = []
    for n in range(1, q.cutoff + 1):
        c = tw[n]
        if c is None:
            continue
        c = (c,) if tw.is_integer else c
        if tw.is_integer and r > 2:
            c = cyclo.mul(c, cyclo.one(r), r)
        v = _mul(c, ginv, r)
        terms.append((n, v[0] if r <= 2 else v))
    route_b = series_sum(terms, beta, r) / Z
    return KMSValue(complex(route_a), complex(route_b))


# ---------------------------------------------------------------------------
# Class-group quotient (imaginary quadratic fields)


def _ideal_classes(q: TruncatedQSM, cg: ClassGroup) -> list[int]:
    """Class index of each basis ideal.

    A split p contributes the class of a prime form for index 0 and its
    inverse for index 1.  Which prime above p gets which class is not pinned
    down, but swapping them permutes ideals of equal norm, so per-norm class
    counts do not depend on the choice.
    """
    cache: dict[PrimeLabel, int] = {}

    def prime_class(lab: PrimeLabel) -> int:
        if lab not in cache:
            p, i, f = lab
            if f == 2:
                cache[lab] = 0
            else:
                F = prime_form(cg, p)
                k = cg.index[F]
                cache[lab] = k if i == 0 else cg.index[F.inverse()]
        return cache[lab]

    out = []
    for v in q.basis:
        c = 0
        for lab, e in v.exps:
            pc = prime_class(lab)
            for _ in range(e):
                c = cg.mul(c, pc)
        out.append(c)
    return out


def kms_class_value(q: TruncatedQSM, cg: ClassGroup, chi: ClassCharacter, gamma: int, beta: float) -> KMSValue:
    """omega_{beta,gamma}(f_chi) for an unramified class-group character.

    ``gamma`` is a class index (the projection of the Galois coordinate to
    the class group).  Route A traces over the basis using the class of each
    ideal; route B uses the character's L-coefficients.
    """
    beta = check_beta(beta)
    if q.field.degree != 2 or q.field.disc != cg.D:
        raise DiscriminantMismatch(f"field discriminant {q.field.disc} does not match {cg.D}")
    L = chi.order
    ginv = cyclo.root(-chi.exponent(gamma), L)
    Z = partition_function(q, beta)
    classes = _ideal_classes(q, cg)
    per_ideal = [cyclo.mul(chi.value(c), ginv, L) for c in classes]
    if L <= 2:
        per_ideal = [v[0] for v in per_ideal]
    route_a = series_sum(_grouped_by_norm(q, per_ideal, L), beta, L) / Z
    coeffs = class_char_L_coeffs(cg, chi, q.cutoff)
    terms = []
    for n in range(1, q.cutoff + 1):
        c = coeffs[n]
        c = (c,) if coeffs.is_integer else c
        v = cyclo.mul(c, ginv, L) if L > 2 else (c[0] * ginv[0],)
        terms.append((n, v[0] if L <= 2 else v))
    route_b = series_sum(terms, beta, L) / Z
    return KMSValue(complex(route_a), complex(route_b))


# ---------------------------------------------------------------------------
# Reports


def report_csv(rows: Iterable[tuple[str, complex, complex, float | None]]) -> str:
    """(quantity, route A, route B, |diff|, bound) rows; a None bound is left blank."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "route_a", "route_b", "abs_diff", "bound"])
    for name, a, b, bound in rows:
        w.writerow([name, _fmt(a), _fmt(b), repr(abs(a - b)), "" if bound is None else repr(bound)])
    return buf.getvalue()


def _fmt(z: complex) -> str:
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+.17g}j"
