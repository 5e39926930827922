"""Ideal counts split by cyclotomic Frobenius, and norm-preserving matchings.

At cyclotomic level the Artin image of an ideal n in (Z/m)* is N(n) mod m,
so the count of ideals of norm n with image gamma is a_n when gamma = n mod m
and 0 otherwise.  The counts are still produced by enumeration so that the
concentration on one class is a checked property rather than an assumption.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .arith_core import primes_up_to
from .errors import InputError, MaskedIndex, NotCoprime, NotEquivalent
from .lseries import equiv_check
from .number_field import NumberField, Undetermined, frobenius_residue, splitting_type
from .qsm import IdealVec, enumerate_ideals, undetermined_primes

__all__ = [
    "FrobCount",
    "frob_count",
    "CountReport",
    "count_identity_check",
    "Obstruction",
    "PsiMatching",
    "build_psi",
    "matching_to_csv",
]


def _units(m: int) -> list[int]:
    return [g for g in range(m) if math.gcd(g, m) == 1]


@dataclass(frozen=True)
class FrobCount:
    modulus: int
    norm: int
    table: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.table.values())

    def support(self) -> list[int]:
        return [g for g, c in self.table.items() if c]

    def is_concentrated(self) -> bool:
        """Supported on at most the single class norm mod m."""
        return all(g == self.norm % self.modulus for g in self.support())


def _tables(K: NumberField, m: int, limit: int, exclude: Iterable[int] = ()) -> tuple[dict[int, dict[int, int]], frozenset[int]]:
    q = enumerate_ideals(K, limit, exclude=exclude)
    units = _units(m)
    out: dict[int, dict[int, int]] = {}
    for n in q.norms:
        n = int(n)
        if math.gcd(n, m) != 1:
            continue
        t = out.setdefault(n, dict.fromkeys(units, 0))
        t[frobenius_residue(K, n, m)] += 1
    return out, q.mask


def frob_count(K: NumberField, m: int, n: int) -> FrobCount:
    """Ideals of norm n bucketed by their Artin image in (Z/m)*."""
    if m < 1 or n < 1:
        raise InputError("m and n must be positive")
    if math.gcd(n, m) != 1:
        raise NotCoprime(f"gcd({n}, {m}) != 1")
    bad = [int(p) for p in primes_up_to(n) if n % p == 0 and isinstance(splitting_type(K, int(p)), Undetermined)]
    if bad:
        raise MaskedIndex(f"norm {n} is divisible by masked primes {bad}")
    tables, _ = _tables(K, m, n)
    table = tables.get(n, dict.fromkeys(_units(m), 0))
    return FrobCount(m, n, table)


@dataclass(frozen=True)
class CountReport:
    passed: bool
    modulus: int
    limit: int
    mask: frozenset[int]
    checked: int
    first_failure: int | None = None
    gamma: int | None = None
    left: int | None = None
    right: int | None = None
    concentrated: bool = True


def count_identity_check(K: NumberField, L: NumberField, m: int, limit: int, *, exclude: Iterable[int] = ()) -> CountReport:
    """b_K(n, gamma) = b_L(n, gamma) for unmasked n <= limit prime to m."""
    if m < 1:
        raise InputError("modulus must be positive")
    mask = set(exclude) | undetermined_primes(K, limit) | undetermined_primes(L, limit)
    tk, _ = _tables(K, m, limit, mask)
    tl, _ = _tables(L, m, limit, mask)
    units = _units(m)
    empty = dict.fromkeys(units, 0)
    checked = 0
    concentrated = True
    for n in range(1, limit + 1):
        if math.gcd(n, m) != 1 or any(n % p == 0 for p in mask):
            continue
        a, b = tk.get(n, empty), tl.get(n, empty)
        concentrated &= FrobCount(m, n, a).is_concentrated() and FrobCount(m, n, b).is_concentrated()
        checked += 1
        for g in units:
            if a[g] != b[g]:
                return CountReport(False, m, limit, frozenset(mask), checked, n, g, a[g], b[g], concentrated)
    return CountReport(True, m, limit, frozenset(mask), checked, concentrated=concentrated)


# ---------------------------------------------------------------------------
# Psi


@dataclass(frozen=True)
class Obstruction:
    p: int
    detail: str


@dataclass(frozen=True)
class PsiMatching:
    """Prime-to-prime matching extended multiplicatively to enumerated ideals.

    This is *a* matching compatible with norms and with cyclotomic Artin
    images (which depend on the norm only); ray-class compatibility is not
    checked.
    """

    limit: int
    mask: frozenset[int]
    primes: dict[tuple, tuple]  # K label -> L label
    ideals: dict[IdealVec, IdealVec] = field(repr=False)

    def __call__(self, n: IdealVec) -> IdealVec:
        return self.ideals[n]

    def is_norm_preserving(self) -> bool:
        return all(a.norm == b.norm for a, b in self.ideals.items())

    def is_multiplicative(self) -> bool:
        """Psi(ab) = Psi(a) Psi(b) whenever ab is enumerated (exhaustive)."""
        keys = sorted(self.ideals, key=lambda v: v.norm)
        for i, a in enumerate(keys):
            if a.norm * a.norm > self.limit:
                break
            for b in keys[i:]:
                if a.norm * b.norm > self.limit:
                    break
                ab = a * b
                if self.ideals[ab] != self.ideals[a] * self.ideals[b]:
                    return False
        return True

    def is_injective(self) -> bool:
        return len(set(self.ideals.values())) == len(self.ideals)


def build_psi(K: NumberField, L: NumberField, limit: int, *, exclude: Iterable[int] = ()) -> PsiMatching | Obstruction:
    """Match primes above each p by equal inertia degree, in canonical order.

    Raises NotEquivalent when the zeta coefficients differ on the range.
    Returns an Obstruction naming p if the visible primes above p cannot be
    matched degree for degree.
    """
    mask = set(exclude) | undetermined_primes(K, limit) | undetermined_primes(L, limit)
    cmp = equiv_check(K, L, limit, exclude=mask)
    if not cmp.equal:
        raise NotEquivalent(f"zeta coefficients differ at n = {cmp.first_mismatch}")
    qk = enumerate_ideals(K, limit, exclude=mask)
    ql = enumerate_ideals(L, limit, exclude=mask)
    primes: dict[tuple, tuple] = {}
    for p in primes_up_to(limit):
        p = int(p)
        if p in mask:
            continue
        # only primes of norm <= limit are visible in the truncation
        sk = [(i, f) for i, (_, f) in enumerate(splitting_type(K, p).pairs) if p**f <= limit]
        sl = [(i, f) for i, (_, f) in enumerate(splitting_type(L, p).pairs) if p**f <= limit]
        by_f: dict[int, list[int]] = defaultdict(list)
        for i, f in sl:
            by_f[f].append(i)
        for i, f in sk:
            if not by_f[f]:
                return Obstruction(p, f"no unmatched prime of degree {f} above {p} in {L.label}")
            primes[(p, i, f)] = (p, by_f[f].pop(0), f)
        if any(by_f.values()):
            return Obstruction(p, f"unmatched primes above {p} in {L.label}")
    ideals = {v: IdealVec(tuple(sorted((primes[lab], e) for lab, e in v.exps))) for v in qk.basis}
    if sorted(ideals.values()) != sorted(ql.basis):
        # cannot happen when the prime matching is total and norm-preserving
        return Obstruction(0, "image of the matching is not the enumerated basis of L")
    return PsiMatching(limit, frozenset(mask), primes, ideals)


def matching_to_csv(psi: PsiMatching) -> str:
    buf = io.StringIO()
    buf.write(f"# N={psi.limit} mask={','.join(map(str, sorted(psi.mask))) or 'none'}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "k_index", "f", "l_index"])
    for (p, i, f), (_, j, _) in sorted(psi.primes.items()):
        w.writerow([p, i, f, j])
    return buf.getvalue()
