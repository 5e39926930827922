"""Finite permutation groups and Gassmann's criterion.

Permutations are tuples of images of 0..d-1.  Composition is right to left:
``compose(g, h)[i] = g[h[i]]``.  Groups are materialized as element sets,
which is fine for the orders (a few hundred) that matter here.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import GroupTooLarge, IndexMismatch, InputError, InvalidPermutation, NotSubgroup
from .number_field import SplittingType

__all__ = [
    "Perm",
    "PermGroup",
    "Subgroup",
    "GassmannResult",
    "compose",
    "inverse",
    "identity",
    "generate",
    "subgroup",
    "gassmann_equivalent",
    "permutation_character_equal",
    "splitting_from_frobenius",
    "are_conjugate",
    "parse_group",
    "load_group",
    "DEFAULT_CAP",
]

Perm = tuple[int, ...]
DEFAULT_CAP = 10**5


def identity(d: int) -> Perm:
    return tuple(range(d))


def compose(g: Perm, h: Perm) -> Perm:
    return tuple(g[i] for i in h)


def inverse(g: Perm) -> Perm:
    out = [0] * len(g)
    for i, gi in enumerate(g):
        out[gi] = i
    return tuple(out)


def _check_perm(g: Sequence[int], d: int) -> Perm:
    try:
        t = tuple(int(x) for x in g)
    except (TypeError, ValueError) as exc:
        raise InvalidPermutation(f"not a permutation: {g!r}") from exc
    if len(t) != d or sorted(t) != list(range(d)):
        raise InvalidPermutation(f"not a permutation of 0..{d - 1}: {list(g)}")
    return t


def _closure(gens: Iterable[Perm], d: int, cap: int) -> list[Perm]:
    e = identity(d)
    gens = [g for g in gens if g != e]
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = compose(g, x)
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise GroupTooLarge(f"group order exceeds cap {cap}")
                queue.append(y)
    return sorted(seen)


@dataclass(frozen=True, eq=False)
class PermGroup:
    degree: int
    generators: tuple[Perm, ...]
    elements: tuple[Perm, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def element_set(self) -> frozenset[Perm]:
        return frozenset(self.elements)

    @property
    def identity(self) -> Perm:
        return identity(self.degree)

    def __contains__(self, g) -> bool:
        return tuple(g) in self.element_set

    @cached_property
    def classes(self) -> tuple[tuple[Perm, ...], ...]:
        """Conjugacy classes: orbits under conjugation by the generators.

        Ordered by their smallest element, so the identity class comes first.
        """
        gens = [(g, inverse(g)) for g in self.generators]
        todo = set(self.elements)
        out = []
        for x in self.elements:
            if x not in todo:
                continue
            orbit = {x}
            stack = [x]
            while stack:
                y = stack.pop()
                for g, gi in gens:
                    z = compose(compose(g, y), gi)
                    if z not in orbit:
                        orbit.add(z)
                        stack.append(z)
            todo -= orbit
            out.append(tuple(sorted(orbit)))
        return tuple(out)

    @cached_property
    def class_index(self) -> dict[Perm, int]:
        return {g: i for i, cls in enumerate(self.classes) for g in cls}

    def is_closed(self) -> bool:
        s = self.element_set
        return all(compose(a, b) in s for a in self.elements for b in self.elements) and all(
            inverse(a) in s for a in self.elements
        )


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: PermGroup
    elements: frozenset[Perm]
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def __contains__(self, g) -> bool:
        return tuple(g) in self.elements

    @cached_property
    def _cosets(self) -> tuple[dict[Perm, int], list[Perm]]:
        """Left cosets xH: label of each element and one representative per coset."""
        label: dict[Perm, int] = {}
        reps: list[Perm] = []
        for x in self.parent.elements:
            if x in label:
                continue
            k = len(reps)
            reps.append(x)
            for h in self.elements:
                label[compose(x, h)] = k
        return label, reps

    def coset_action(self, g: Perm) -> Perm:
        """Permutation of the left cosets induced by left multiplication by g."""
        label, reps = self._cosets
        return tuple(label[compose(g, x)] for x in reps)

    def fixed_cosets(self, g: Perm) -> int:
        return sum(1 for i, j in enumerate(self.coset_action(g)) if i == j)


def generate(degree: int, generators: Iterable[Sequence[int]], *, cap: int = DEFAULT_CAP) -> PermGroup:
    if degree < 1:
        raise InputError("degree must be positive")
    gens = tuple(_check_perm(g, degree) for g in generators)
    return PermGroup(degree, gens, tuple(_closure(gens, degree, cap)))


def subgroup(G: PermGroup, generators: Iterable[Sequence[int]], name: str = "") -> Subgroup:
    gens = [_check_perm(g, G.degree) for g in generators]
    for g in gens:
        if g not in G:
            raise NotSubgroup(f"generator {list(g)} is not in the group")
    return Subgroup(G, frozenset(_closure(gens, G.degree, G.order)), name)


def _check_sub(G: PermGroup, *Hs: Subgroup) -> None:
    for H in Hs:
        if H.parent is not G and not H.elements <= G.element_set:
            raise NotSubgroup(f"subgroup {H.name or '?'} is not contained in the group")


def _cycle_type(p: Perm) -> list[int]:
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if not seen[i]:
            n = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                n += 1
            out.append(n)
    return sorted(out)


def splitting_from_frobenius(G: PermGroup, H: Subgroup, g: Sequence[int]) -> SplittingType:
    _check_sub(G, H)
    g = tuple(g)
    if g not in G:
        raise NotSubgroup(f"{list(g)} is not an element of the group")
    return SplittingType((1, ell) for ell in _cycle_type(H.coset_action(g)))


def are_conjugate(G: PermGroup, H1: Subgroup, H2: Subgroup) -> bool:
    """Exhaustive search for x with x H1 x^-1 = H2."""
    _check_sub(G, H1, H2)
    if H1.order != H2.order:
        return False
    # conjugation preserves class intersections; a cheap necessary test first
    if _class_profile(G, H1) != _class_profile(G, H2):
        return False
    for x in G.elements:
        xi = inverse(x)
        if all(compose(compose(x, h), xi) in H2.elements for h in H1.elements):
            return True
    return False


def _class_profile(G: PermGroup, H: Subgroup) -> list[int]:
    idx = G.class_index
    c = Counter(idx[h] for h in H.elements)
    return [c.get(i, 0) for i in range(len(G.classes))]


@dataclass(frozen=True)
class GassmannResult:
    equivalent: bool
    witness_class: int | None
    conjugate: bool
    profile1: tuple[int, ...] = field(default=(), repr=False)
    profile2: tuple[int, ...] = field(default=(), repr=False)


def gassmann_equivalent(G: PermGroup, H1: Subgroup, H2: Subgroup) -> GassmannResult:
    """|C n H1| = |C n H2| for every conjugacy class C of G."""
    _check_sub(G, H1, H2)
    p1, p2 = _class_profile(G, H1), _class_profile(G, H2)
    witness = next((i for i, (a, b) in enumerate(zip(p1, p2)) if a != b), None)
    equivalent = witness is None
    if H1.index == H2.index:
        # the fixed-point formulation must agree; a mismatch is an engine bug
        assert permutation_character_equal(G, H1, H2) == equivalent, "Gassmann formulations disagree"
    return GassmannResult(equivalent, witness, are_conjugate(G, H1, H2), tuple(p1), tuple(p2))


def permutation_character_equal(G: PermGroup, H1: Subgroup, H2: Subgroup) -> bool:
    """Every g fixes as many cosets of H1 as of H2."""
    _check_sub(G, H1, H2)
    if H1.index != H2.index:
        raise IndexMismatch(f"indices differ: {H1.index} vs {H2.index}")
    # the fixed-point count is a class function, one representative per class suffices
    return all(H1.fixed_cosets(cls[0]) == H2.fixed_cosets(cls[0]) for cls in G.classes)


# ---------------------------------------------------------------------------
# Group files


def parse_group(obj: Mapping, *, cap: int = DEFAULT_CAP) -> tuple[PermGroup, dict[str, Subgroup]]:
    """``{degree, generators, subgroups: {name: [generator index | permutation]}}``."""
    if not isinstance(obj, Mapping):
        raise InputError("group file must hold a JSON object")
    unknown = set(obj) - {"degree", "generators", "subgroups", "label", "comment"}
    if unknown:
        raise InputError(f"unknown keys in group file: {sorted(unknown)}")
    try:
        degree = int(obj["degree"])
        gens = list(obj["generators"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed group file: {exc}") from exc
    G = generate(degree, gens, cap=cap)
    subs: dict[str, Subgroup] = {}
    for name, entries in dict(obj.get("subgroups", {})).items():
        sgens = []
        for e in entries:
            if isinstance(e, int):
                if not 0 <= e < len(G.generators):
                    raise InputError(f"subgroup {name}: generator index {e} out of range")
                sgens.append(G.generators[e])
            else:
                sgens.append(e)
        subs[name] = subgroup(G, sgens, name)
    return G, subs


def load_group(path: str | Path, *, cap: int = DEFAULT_CAP) -> tuple[PermGroup, dict[str, Subgroup]]:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return parse_group(obj, cap=cap)
