"""Number fields Q[x]/(f) and the splitting of rational primes.

Splitting data comes from factoring f modulo p.  Where p divides disc(f) the
factorization is trusted only if the Dedekind criterion shows p does not
divide the index of Z[theta]; otherwise the prime is either covered by a
user-supplied override or reported as undetermined.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

from . import kernels
from .arith_core import (
    FpPoly,
    Poly,
    _gcd_p,
    _mul_z,
    discriminant,
    factor_integer,
    factor_mod_p,
    is_prime,
    primes_up_to,
    rational_roots,
)
from .errors import (
    InputError,
    InvalidOverride,
    IrreducibilityUnknown,
    NonMonic,
    NotBadPrime,
    NotCoprime,
    NotPrime,
    ReduciblePolynomial,
)

__all__ = [
    "SplittingType",
    "Undetermined",
    "UNDETERMINED",
    "PrimeIdeal",
    "NumberField",
    "new_field",
    "splitting_type",
    "prime_ideals",
    "is_regular_at",
    "frobenius_residue",
    "certify_irreducible",
    "load_field",
    "parse_field",
    "field_to_dict",
    "dump_field",
]


@dataclass(frozen=True)
class SplittingType:
    """(e, f) pairs of the primes above p, sorted by f then e."""

    pairs: tuple[tuple[int, int], ...]

    def __init__(self, pairs: Iterable[tuple[int, int]]):
        ps = []
        for e, f in pairs:
            e, f = int(e), int(f)
            if e < 1 or f < 1:
                raise InputError(f"invalid (e, f) pair {(e, f)}")
            ps.append((e, f))
        ps.sort(key=lambda ef: (ef[1], ef[0]))
        object.__setattr__(self, "pairs", tuple(ps))

    @property
    def degree(self) -> int:
        return sum(e * f for e, f in self.pairs)

    @property
    def inertia_degrees(self) -> tuple[int, ...]:
        return tuple(f for _, f in self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def to_list(self) -> list[list[int]]:
        return [[e, f] for e, f in self.pairs]


@dataclass(frozen=True)
class Undetermined:
    """Splitting at p is not certified (Z[theta] may be non-maximal there)."""

    p: int


UNDETERMINED = Undetermined(0)


@dataclass(frozen=True)
class PrimeIdeal:
    """Prime of K above p; ``index`` is its position in the canonical order."""

    p: int
    index: int
    e: int
    f: int
    factor: FpPoly | None = None

    @property
    def norm(self) -> int:
        return self.p**self.f

    @property
    def label(self) -> tuple[int, int, int]:
        return (self.p, self.index, self.f)


@dataclass(frozen=True, eq=False)
class NumberField:
    label: str
    poly: Poly
    degree: int
    disc: int
    bad_primes: frozenset[int]
    overrides: Mapping[int, SplittingType]
    _memo: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NumberField):
            return NotImplemented
        return (self.label, self.poly, dict(self.overrides)) == (
            other.label,
            other.poly,
            dict(other.overrides),
        )

    def __hash__(self) -> int:
        return hash((self.label, self.poly))

    def splitting_type(self, p: int) -> Union[SplittingType, Undetermined]:
        return splitting_type(self, p)

    def _cached(self, key, compute):
        # concurrent readers are fine; inserts serialize on the lock
        try:
            return self._memo[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            return self._memo.setdefault(key, value)


def _subset_sums(degs: list[int]) -> set[int]:
    sums = {0}
    for d in degs:
        sums |= {s + d for s in sums}
    return sums


def _mignotte_bound(f: Poly) -> int:
    norm2 = math.isqrt(sum(c * c for c in f.coeffs)) + 1
    return (1 << f.degree) * norm2


def _symmetric_lift(c: Iterable[int], p: int) -> Poly:
    half = p // 2
    return Poly(a - p if a > half else a for a in c)


def _divides_z(g: Poly, f: Poly) -> bool:
    # g monic
    r = list(f.coeffs)
    dg = g.degree
    for k in range(len(r) - 1 - dg, -1, -1):
        c = r[k + dg]
        if c:
            for j in range(dg + 1):
                r[k + j] -= c * g.coeffs[j]
    return not any(r[:dg])


def certify_irreducible(f: Poly, *, prime_bound: int = 1000) -> bool:
    """Decide irreducibility of a monic integer polynomial over Q.

    Degree patterns of f mod p restrict the degrees a rational factor could
    have.  If some degree survives every p <= ``prime_bound``, the factors
    modulo one large prime (beyond the Mignotte coefficient bound) are
    recombined exhaustively, which settles the question either way.
    """
    if not f.is_monic():
        raise NonMonic(f"{f} is not monic")
    n = f.degree
    if n < 1:
        raise InputError("polynomial must have degree >= 1")
    if n == 1:
        return True
    if rational_roots(f):
        return False
    disc = discriminant(f)
    if disc == 0:
        return False  # repeated factor over Q
    possible = set(range(1, n))
    for p in primes_up_to(prime_bound):
        if disc % p == 0:
            continue
        possible &= _subset_sums(kernels.ddf_pattern(f.coeffs, p))
        if not possible:
            return True
    bound = 2 * _mignotte_bound(f) + 1
    p = bound
    while not (is_prime(p) and disc % p):
        p += 1
    factors = [g for g, _ in factor_mod_p(f.mod_p(p))]
    if len(factors) > 18:
        raise IrreducibilityUnknown(f"too many modular factors ({len(factors)}) to recombine")
    for size in range(1, len(factors) // 2 + 1):
        for combo in itertools.combinations(factors, size):
            deg = sum(g.degree for g in combo)
            if deg not in possible:
                continue
            prod = [1]
            for g in combo:
                prod = [c % p for c in _mul_z(prod, g.coeffs)]
            if _divides_z(_symmetric_lift(prod, p), f):
                return False
    return True


def prime_divisors(n: int, trial_bound: int = 10**5) -> list[int]:
    """Primes dividing n; small primes are stripped before full factoring.

    Polynomial discriminants are huge but smooth, so only the cofactor left
    after trial division has to respect the 2**64 limit of factor_integer.
    """
    n = abs(int(n))
    out = []
    for q in primes_up_to(trial_bound):
        if n == 1:
            break
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
    if n > 1:
        out.extend(q for q, _ in factor_integer(n))
    return sorted(out)


def new_field(
    label: str,
    f: Poly | Iterable[int],
    overrides: Mapping[int, Iterable[tuple[int, int]]] | None = None,
) -> NumberField:
    poly = f if isinstance(f, Poly) else Poly(f)
    if not poly.is_monic():
        raise NonMonic(f"defining polynomial {poly} is not monic")
    if poly.degree < 1:
        raise InputError("defining polynomial must have degree >= 1")
    if not certify_irreducible(poly):
        raise ReduciblePolynomial(f"{poly} is reducible over Q")
    n = poly.degree
    disc = discriminant(poly)
    bad = frozenset(prime_divisors(disc))
    ov: dict[int, SplittingType] = {}
    for p, pairs in (overrides or {}).items():
        p = int(p)
        if not is_prime(p):
            raise InvalidOverride(f"override key {p} is not prime")
        st = pairs if isinstance(pairs, SplittingType) else SplittingType(pairs)
        if st.degree != n:
            raise InvalidOverride(f"override at {p}: sum of e*f is {st.degree}, degree is {n}")
        ov[p] = st
    return NumberField(str(label), poly, n, disc, bad, ov)


def _regular(K: NumberField, p: int) -> bool:
    fl = [c % p for c in K.poly.coeffs]
    facs = factor_mod_p(FpPoly(p, fl))
    g = [1]  # product of the distinct irreducible factors
    h = [1]  # cofactor so that g * h = f mod p
    for gi, e in facs:
        g = _mul_z(g, gi.coeffs)
        for _ in range(e - 1):
            h = _mul_z(h, gi.coeffs)
    gh = _mul_z(g, h)
    diff = [a - (gh[i] if i < len(gh) else 0) for i, a in enumerate(K.poly.coeffs)]
    assert all(c % p == 0 for c in diff)
    F = [(c // p) % p for c in diff]
    while F and F[-1] == 0:
        F.pop()
    gm = [c % p for c in g]
    hm = [c % p for c in h]
    d = _gcd_p(_gcd_p(F, gm, p), hm, p) if F else _gcd_p(gm, hm, p)
    return len(d) == 1


def is_regular_at(K: NumberField, p: int) -> bool:
    """Dedekind criterion: True iff p does not divide [O_K : Z[theta]]."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if K.disc % p:
        raise NotBadPrime(f"{p} does not divide disc(f) = {K.disc}")
    return K._cached(("regular", p), lambda: _regular(K, p))


def _splitting(K: NumberField, p: int) -> Union[SplittingType, Undetermined]:
    if K.degree == 1:
        return SplittingType([(1, 1)])
    if p not in K.bad_primes:
        if p < 2**31 and K.degree < 64:
            degs = kernels.ddf_pattern(K.poly.coeffs, p)
        else:
            degs = sorted(g.degree for g, _ in factor_mod_p(K.poly.mod_p(p)))
        return SplittingType((1, d) for d in degs)
    if p in K.overrides:
        return K.overrides[p]
    if is_regular_at(K, p):
        return SplittingType((e, g.degree) for g, e in factor_mod_p(K.poly.mod_p(p)))
    return Undetermined(p)


def splitting_type(K: NumberField, p: int) -> Union[SplittingType, Undetermined]:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return K._cached(("split", p), lambda: _splitting(K, p))


def prime_ideals(K: NumberField, p: int) -> list[PrimeIdeal] | Undetermined:
    """Primes above p in canonical order: by f, then e, then the factor mod p.

    Override primes carry no factor and keep the override's order.
    """
    st = splitting_type(K, p)
    if isinstance(st, Undetermined):
        return st
    if K.degree == 1:
        return [PrimeIdeal(p, 0, 1, 1, FpPoly(p, [0, 1]))]
    if p in K.bad_primes and p in K.overrides:
        return [PrimeIdeal(p, i, e, f) for i, (e, f) in enumerate(st.pairs)]

    def compute():
        facs = factor_mod_p(K.poly.mod_p(p))
        facs.sort(key=lambda gm: (gm[0].degree, gm[1], gm[0].sort_key()))
        return [PrimeIdeal(p, i, e, g.degree, g) for i, (g, e) in enumerate(facs)]

    return K._cached(("ideals", p), compute)


def frobenius_residue(K: NumberField, ideal_norm: int, m: int) -> int:
    """Image of an ideal of the given norm in Gal(Q(zeta_m)/Q) = (Z/m)*.

    At cyclotomic level the Artin symbol of an ideal is its norm mod m,
    independent of the field beyond the norm.
    """
    if m < 1:
        raise InputError("modulus must be positive")
    if math.gcd(ideal_norm, m) != 1:
        raise NotCoprime(f"gcd({ideal_norm}, {m}) != 1")
    return ideal_norm % m


# ---------------------------------------------------------------------------
# Field files

_FIELD_KEYS = {"label", "poly", "overrides"}


def parse_field(obj: Mapping) -> NumberField:
    """Build a field from the file schema ``{label, poly, overrides}``."""
    if not isinstance(obj, Mapping):
        raise InputError("field object must be a JSON object")
    unknown = set(obj) - _FIELD_KEYS
    if unknown:
        raise InputError(f"unknown keys in field object: {sorted(unknown)}")
    if "label" not in obj or "poly" not in obj:
        raise InputError("field object needs 'label' and 'poly'")
    label = obj["label"]
    poly = obj["poly"]
    if not isinstance(label, str):
        raise InputError("'label' must be a string")
    if not isinstance(poly, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in poly):
        raise InputError("'poly' must be a list of integers [c0, ..., cn]")
    raw = obj.get("overrides", {}) or {}
    if not isinstance(raw, Mapping):
        raise InputError("'overrides' must be an object")
    overrides = {}
    for key, pairs in raw.items():
        try:
            p = int(key)
        except (TypeError, ValueError):
            raise InputError(f"override key {key!r} is not an integer") from None
        if not isinstance(pairs, list) or not all(
            isinstance(ef, list) and len(ef) == 2 and all(isinstance(v, int) for v in ef)
            for ef in pairs
        ):
            raise InputError(f"override at {key} must be a list of [e, f] pairs")
        overrides[p] = [tuple(ef) for ef in pairs]
    return new_field(label, Poly(poly), overrides)


def load_field(path: str | Path) -> NumberField:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_field(obj)


def field_to_dict(K: NumberField) -> dict:
    out = {"label": K.label, "poly": list(K.poly.coeffs)}
    if K.overrides:
        out["overrides"] = {str(p): st.to_list() for p, st in sorted(K.overrides.items())}
    return out


def dump_field(K: NumberField) -> str:
    return json.dumps(field_to_dict(K), indent=2) + "\n"
