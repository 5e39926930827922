"""Class groups of imaginary quadratic fields via reduced binary quadratic forms.

Forms are (a, b, c) with discriminant b^2 - 4ac = D < 0.  Only fundamental
discriminants are accepted, so the forms model ideal classes of the maximal
order of Q(sqrt D).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import cyclo
from .errors import DiscriminantMismatch, InputError, NotFundamental, NotNegative
from .lseries import CoeffSeries, _pack, is_fundamental_discriminant

__all__ = [
    "QuadForm",
    "ClassGroup",
    "ClassCharacter",
    "reduced_forms",
    "reduce_form",
    "compose",
    "class_group",
    "ideal_count_by_class",
    "class_count_table",
    "class_char_L_coeffs",
    "all_characters",
    "prime_form",
    "quadratic_field_poly",
]


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        return abs(b) <= a <= c and not (b < 0 and (abs(b) == a or a == c))

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def inverse(self) -> "QuadForm":
        return reduce_form(QuadForm(self.a, -self.b, self.c))

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def _check_disc(D: int) -> None:
    if D >= 0:
        raise NotNegative(f"discriminant {D} is not negative")
    if not is_fundamental_discriminant(D):
        raise NotFundamental(f"{D} is not a fundamental discriminant")


def reduce_form(f: QuadForm) -> QuadForm:
    a, b, c = f.a, f.b, f.c
    if a <= 0:
        raise InputError("only positive definite forms can be reduced")

    def normalize(a, b, c):
        r = (a - b) // (2 * a)
        return a, b + 2 * r * a, a * r * r + b * r + c

    a, b, c = normalize(a, b, c)
    while a > c:
        a, b, c = normalize(c, -b, a)
    if a == c and b < 0:
        b = -b
    return QuadForm(a, b, c)


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced primitive forms of discriminant D, sorted by (a, b)."""
    _check_disc(D)
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            f = QuadForm(a, b, c)
            if c >= a and f.is_reduced() and f.is_primitive():
                out.append(f)
    out.sort(key=lambda f: (f.a, f.b))
    return out


def compose(f1: QuadForm, f2: QuadForm) -> QuadForm:
    """Reduced representative of the product class (Shanks-style composition)."""
    D = f1.disc
    if f2.disc != D:
        raise DiscriminantMismatch(f"discriminants {D} and {f2.disc} differ")
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1 = f1.a, f1.b
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - D) // (4 * a3)
    return reduce_form(QuadForm(a3, b3, c3))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x a + y b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _units(D: int) -> int:
    """Half the number of roots of unity in Q(sqrt D)."""
    return {-3: 3, -4: 2}.get(D, 1)


@dataclass(frozen=True, eq=False)
class ClassGroup:
    D: int
    forms: tuple[QuadForm, ...]
    table: np.ndarray  # table[i, j] = index of forms[i] * forms[j]
    w: int

    @property
    def h(self) -> int:
        return len(self.forms)

    @cached_property
    def index(self) -> dict[QuadForm, int]:
        return {f: i for i, f in enumerate(self.forms)}

    @property
    def principal(self) -> QuadForm:
        return self.forms[0]

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def power(self, i: int, k: int) -> int:
        out = 0
        for _ in range(k):
            out = self.mul(out, i)
        return out

    def order_of(self, i: int) -> int:
        k, x = 1, i
        while x != 0:
            x = self.mul(x, i)
            k += 1
        return k

    @cached_property
    def _basis(self) -> tuple[tuple[int, ...], tuple[int, ...], dict[int, tuple[int, ...]]]:
        gens: list[int] = []
        orders: list[int] = []
        h = self.h
        for p, _ in _factor_small(h):
            sylow = [i for i in range(h) if _is_power_of(self.order_of(i), p)]
            invariants = _p_invariants(self, sylow, p)
            found = _p_basis(self, sylow, invariants)
            assert found is not None, "no basis found for the p-Sylow subgroup"
            gens.extend(found)
            orders.extend(invariants)
        pairs = sorted(zip(orders, gens))
        orders = [o for o, _ in pairs]
        gens = [g for _, g in pairs]
        coords: dict[int, tuple[int, ...]] = {}
        for exps in itertools.product(*(range(o) for o in orders)):
            x = 0
            for g, e in zip(gens, exps):
                x = self.mul(x, self.power(g, e))
            coords[x] = exps
        assert len(coords) == h, "basis does not generate the group freely"
        return tuple(gens), tuple(orders), coords

    @property
    def structure(self) -> tuple[int, ...]:
        """Elementary divisors (prime-power cyclic orders), ascending."""
        return self._basis[1]

    @property
    def generators(self) -> tuple[QuadForm, ...]:
        return tuple(self.forms[g] for g in self._basis[0])

    def coordinates(self, f: QuadForm | int) -> tuple[int, ...]:
        i = f if isinstance(f, int) else self.index[reduce_form(f)]
        return self._basis[2][i]

    @property
    def exponent(self) -> int:
        return math.lcm(1, *self.structure)

    def is_group(self) -> bool:
        """Exhaustive check of identity, inverses and associativity."""
        h = self.h
        t = self.table
        if not all(t[0, i] == i == t[i, 0] for i in range(h)):
            return False
        if not all(0 in t[i] for i in range(h)):
            return False
        if not np.array_equal(t, t.T):
            return False
        for i in range(h):
            for j in range(h):
                tij = t[i, j]
                for k in range(h):
                    if t[tij, k] != t[i, t[j, k]]:
                        return False
        return True


def _factor_small(n: int) -> list[tuple[int, int]]:
    out = []
    q = 2
    while q * q <= n:
        e = 0
        while n % q == 0:
            n //= q
            e += 1
        if e:
            out.append((q, e))
        q += 1
    if n > 1:
        out.append((n, 1))
    return out


def _is_power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _p_invariants(cg: ClassGroup, sylow: list[int], p: int) -> list[int]:
    # number of cyclic factors of order >= p^k is log_p(n_k / n_{k-1}),
    # n_k = #{x : x^(p^k) = 1}
    orders = [cg.order_of(i) for i in sylow]
    counts = [1]
    k = 1
    while counts[-1] < len(sylow):
        counts.append(sum(1 for o in orders if (p**k) % o == 0))
        k += 1
    at_least = []
    for k in range(1, len(counts)):
        ratio = counts[k] // counts[k - 1]
        at_least.append(round(math.log(ratio, p)) if ratio > 1 else 0)
    invariants = []
    for k in range(len(at_least)):
        nxt = at_least[k + 1] if k + 1 < len(at_least) else 0
        invariants.extend([p ** (k + 1)] * (at_least[k] - nxt))
    return sorted(invariants, reverse=True)


def _p_basis(cg: ClassGroup, sylow: list[int], invariants: list[int]):
    def search(chosen, sub, remaining):
        if not remaining:
            return chosen
        d = remaining[0]
        for x in sylow:
            if cg.order_of(x) != d:
                continue
            powers = [0]
            for _ in range(d - 1):
                powers.append(cg.mul(powers[-1], x))
            if any(pw in sub for pw in powers[1:]):
                continue
            new_sub = {cg.mul(s, pw) for s in sub for pw in powers}
            res = search(chosen + [x], new_sub, remaining[1:])
            if res is not None:
                return res
        return None

    return search([], {0}, invariants)


def class_group(D: int) -> ClassGroup:
    forms = reduced_forms(D)
    idx = {f: i for i, f in enumerate(forms)}
    h = len(forms)
    table = np.zeros((h, h), dtype=np.int64)
    for i, f in enumerate(forms):
        for j in range(i, h):
            k = idx[compose(f, forms[j])]
            table[i, j] = table[j, i] = k
    table.setflags(write=False)
    return ClassGroup(D, tuple(forms), table, _units(D))


# ---------------------------------------------------------------------------
# Ideal counts per class


def representations(f: QuadForm, n: int) -> int:
    """#{(x, y) in Z^2 : f(x, y) = n}.

    From 4a f(x, y) = (2ax + by)^2 + |D| y^2 we get |D| y^2 <= 4an, so
    |y| <= 2 sqrt(an/|D|); for each such y the x solving the quadratic are
    checked exactly.
    """
    a, b = f.a, f.b
    D = f.disc
    ymax = math.isqrt(4 * a * n // -D)
    count = 0
    for y in range(-ymax, ymax + 1):
        disc = D * y * y + 4 * a * n
        if disc < 0:
            continue
        s = math.isqrt(disc)
        if s * s != disc:
            continue
        for num in {-b * y + s, -b * y - s}:
            if num % (2 * a) == 0:
                count += 1
    return count


def ideal_count_by_class(cg: ClassGroup, n: int) -> dict[QuadForm, int]:
    """Integral ideals of norm n in each class: r_F(n) / (2w)."""
    if n < 1:
        raise InputError("n must be >= 1")
    return {f: representations(f, n) // (2 * cg.w) for f in cg.forms}


def class_count_table(cg: ClassGroup, limit: int) -> np.ndarray:
    """counts[i, n] = ideals of norm n in class i, by one sweep over (x, y)."""
    counts = np.zeros((cg.h, limit + 1), dtype=np.int64)
    D = cg.D
    for i, f in enumerate(cg.forms):
        a, b, c = f.a, f.b, f.c
        ymax = math.isqrt(4 * a * limit // -D)
        for y in range(-ymax, ymax + 1):
            # f(x, y) <= limit  <=>  (2ax + by)^2 <= 4a*limit + D y^2
            rhs = 4 * a * limit + D * y * y
            if rhs < 0:
                continue
            s = math.isqrt(rhs)
            xlo = -((b * y + s) // (2 * a)) - 1
            xhi = (s - b * y) // (2 * a) + 1
            for x in range(xlo, xhi + 1):
                v = a * x * x + b * x * y + c * y * y
                if 1 <= v <= limit:
                    counts[i, v] += 1
    if np.any(counts % (2 * cg.w)):
        raise AssertionError("representation counts not divisible by the unit count")
    return counts // (2 * cg.w)


# ---------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class ClassCharacter:
    """chi(g_i) = zeta_{d_i} ** exps[i] on the basis of elementary divisors."""

    group: ClassGroup
    exps: tuple[int, ...]

    def __post_init__(self):
        if len(self.exps) != len(self.group.structure):
            raise InputError("one exponent per elementary divisor is required")

    @property
    def order(self) -> int:
        return self.group.exponent

    def exponent(self, f: QuadForm | int) -> int:
        L = self.order
        coords = self.group.coordinates(f)
        return sum(k * (L // d) * e for k, d, e in zip(self.exps, self.group.structure, coords)) % L

    def value(self, f: QuadForm | int) -> tuple[int, ...]:
        return cyclo.root(self.exponent(f), self.order)

    def is_trivial(self) -> bool:
        return all(k % d == 0 for k, d in zip(self.exps, self.group.structure))


def all_characters(cg: ClassGroup) -> list[ClassCharacter]:
    return [ClassCharacter(cg, e) for e in itertools.product(*(range(d) for d in cg.structure))]


def class_char_L_coeffs(cg: ClassGroup, chi: ClassCharacter, limit: int, *, counts: np.ndarray | None = None) -> CoeffSeries:
    """c_n = sum over classes C of chi(C) * #{ideals of norm n in C}."""
    if counts is None:
        counts = class_count_table(cg, limit)
    L = chi.order
    vals = [chi.value(i) for i in range(cg.h)]
    rows = []
    for n in range(limit + 1):
        acc = [0] * cyclo.phi(L)
        for i in range(cg.h):
            k = int(counts[i, n])
            if k:
                acc = [s + k * v for s, v in zip(acc, vals[i])]
        rows.append(tuple(acc))
    return CoeffSeries(limit, _pack(limit, L, rows), L, frozenset(), f"L(D={cg.D},chi={chi.exps})")


def prime_form(cg: ClassGroup, p: int) -> QuadForm | None:
    """Reduced form of the class of a prime ideal above p, if p is not inert.

    The other prime above a split p lies in the inverse class.
    """
    D = cg.D
    # b must share the parity of D; one b per residue class mod 2p suffices
    for b in range(D % 2, 2 * p, 2):
        if (b * b - D) % (4 * p) == 0:
            return reduce_form(QuadForm(p, b, (b * b - D) // (4 * p)))
    return None


def quadratic_field_poly(D: int) -> list[int]:
    """Monic defining polynomial of disc D whose root generates the maximal order."""
    if D % 4 == 0:
        return [-(D // 4), 0, 1]
    return [(1 - D) // 4, -1, 1]


# ---------------------------------------------------------------------------
# CSV


def counts_to_csv(cg: ClassGroup, limit: int) -> str:
    counts = class_count_table(cg, limit)
    buf = io.StringIO()
    buf.write(f"# D={cg.D} h={cg.h} structure={'x'.join(map(str, cg.structure)) or '1'}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "class", "count"])
    for n in range(1, limit + 1):
        for i, f in enumerate(cg.forms):
            w.writerow([n, str(f), int(counts[i, n])])
    return buf.getvalue()


def characters_to_csv(cg: ClassGroup, limit: int) -> str:
    counts = class_count_table(cg, limit)
    chars = all_characters(cg)
    series = [class_char_L_coeffs(cg, chi, limit, counts=counts) for chi in chars]
    buf = io.StringIO()
    buf.write(f"# D={cg.D} h={cg.h} characters={len(chars)}\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["n"]
    for chi in chars:
        tag = "-".join(map(str, chi.exps)) or "0"
        header += [f"re[{tag}]", f"im[{tag}]"]
    w.writerow(header)
    for n in range(1, limit + 1):
        row: list = [n]
        for s in series:
            z = s.complex_value(n)
            row += [repr(round(z.real, 12) + 0.0), repr(round(z.imag, 12) + 0.0)]
        w.writerow(row)
    return buf.getvalue()
