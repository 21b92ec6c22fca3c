"""Finite permutation groups, materialized as sorted element lists.

Points are ``0..n-1``. Products compose right to left: ``(p * q)(i) = p(q(i))``.
Groups are closed by breadth-first search from their generators and stored
in lexicographic order of image tuples, which makes every derived listing
(classes, subgroups, tables) deterministic.
"""

from __future__ import annotations

import math
import re
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import CapExceededError, MembershipError, ValidationError

GROUP_CAP = 10**5


@dataclass(frozen=True, order=True)
class Perm:
    images: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.images)
        if sorted(self.images) != list(range(n)):
            raise ValidationError(f"not a bijection on {n} points: {self.images}")

    @classmethod
    def _raw(cls, images: tuple[int, ...]) -> Perm:
        # internal fast path: images already known to be a bijection
        obj = object.__new__(cls)
        object.__setattr__(obj, "images", images)
        return obj

    @classmethod
    def identity(cls, n: int) -> Perm:
        return cls._raw(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Perm:
        img = list(range(n))
        seen: set[int] = set()
        for cyc in cycles:
            cyc = list(cyc)
            for pt in cyc:
                if not 0 <= pt < n:
                    raise ValidationError(f"point {pt} outside 0..{n - 1}")
                if pt in seen:
                    raise ValidationError(f"point {pt} repeated across cycles")
                seen.add(pt)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                img[a] = b
        return cls(tuple(img))

    @classmethod
    def parse(cls, text: str, n: int, one_based: bool = False) -> Perm:
        """Read cycle notation such as ``(0 1 2)(3 4)`` or ``()``."""
        text = text.strip()
        if not re.fullmatch(r"(\(\s*(\d+[\s,]*)*\))+", text):
            raise ValidationError(f"bad cycle notation: {text!r}")
        shift = 1 if one_based else 0
        cycles = [
            [int(tok) - shift for tok in re.split(r"[\s,]+", body.strip()) if tok]
            for body in re.findall(r"\(([^)]*)\)", text)
        ]
        return cls.from_cycles(n, [c for c in cycles if c])

    @property
    def n(self) -> int:
        return len(self.images)

    def __mul__(self, other: Perm) -> Perm:
        a = self.images
        return Perm._raw(tuple([a[i] for i in other.images]))

    def __call__(self, i: int) -> int:
        return self.images[i]

    def inverse(self) -> Perm:
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm._raw(tuple(inv))

    def __pow__(self, k: int) -> Perm:
        if k < 0:
            return self.inverse() ** (-k)
        result = Perm.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out: list[tuple[int, ...]] = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if include_fixed or len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    @property
    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles(include_fixed=True)), reverse=True))

    @property
    def order(self) -> int:
        return math.lcm(*self.cycle_type) if self.n else 1

    @property
    def orbit_count(self) -> int:
        return len(self.cycle_type)

    @property
    def ind(self) -> int:
        return self.n - self.orbit_count

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def label(self, one_based: bool = True) -> str:
        """Cycle notation; digits are run together when every point is a single digit."""
        cycs = self.cycles()
        if not cycs:
            return "()"
        shift = 1 if one_based else 0
        sep = "" if self.n + shift <= 10 else " "
        return "".join("(" + sep.join(str(i + shift) for i in c) + ")" for c in cycs)

    def __repr__(self) -> str:
        return f"Perm({self.label(one_based=False)!s}, n={self.n})"


@dataclass(frozen=True)
class PermGroup:
    n: int
    elements: tuple[Perm, ...]
    generators: tuple[Perm, ...] = ()
    name: str | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {g: i for i, g in enumerate(self.elements)})

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Perm]:
        return iter(self.elements)

    def __contains__(self, g: object) -> bool:
        return g in self._index

    def index(self, g: Perm) -> int:
        try:
            return self._index[g]
        except KeyError:
            raise MembershipError(f"{g!r} is not in {self.name or 'the group'}") from None

    @property
    def identity(self) -> Perm:
        return Perm.identity(self.n)

    def is_transitive(self) -> bool:
        if self.n == 0:
            return True
        reached = {0}
        stack = [0]
        gens = self.generators or self.elements
        while stack:
            i = stack.pop()
            for g in gens:
                j = g(i)
                if j not in reached:
                    reached.add(j)
                    stack.append(j)
        return len(reached) == self.n

    @cached_property
    def classes(self) -> list[ConjClass]:
        return conjugacy_classes(self)


@dataclass(frozen=True)
class ConjClass:
    representative: Perm
    members: tuple[Perm, ...]
    cycle_type: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def label(self, one_based: bool = True) -> str:
        return "[" + self.representative.label(one_based) + "]"


@dataclass(frozen=True)
class ElementData:
    order: int
    orbit_count_points: int
    ind: int
    regular_orbit_count: int


# ---------------------------------------------------------------------------
# construction


def _closure(n: int, gens: Sequence[Perm], cap: int) -> list[Perm]:
    ident = Perm.identity(n)
    seen = {ident}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = x * s
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise CapExceededError(f"group closure exceeds cap of {cap} elements")
                queue.append(y)
    return sorted(seen)


def build_group(
    n: int, generators: Iterable[Perm], name: str | None = None, cap: int = GROUP_CAP
) -> PermGroup:
    """Close ``generators`` under composition on ``n`` points."""
    if n < 1:
        raise ValidationError("a permutation group needs at least one point")
    gens = tuple(g if isinstance(g, Perm) else Perm(tuple(g)) for g in generators)
    for g in gens:
        if g.n != n:
            raise ValidationError(f"generator acts on {g.n} points, expected {n}")
    elements = _closure(n, gens, cap)
    return PermGroup(n=n, elements=tuple(elements), generators=gens, name=name)


def subgroup(G: PermGroup, elements: Iterable[Perm], name: str | None = None) -> PermGroup:
    """Subgroup generated by ``elements`` inside ``G``."""
    gens = tuple(sorted(set(elements)))
    for g in gens:
        G.index(g)
    elems = _closure(G.n, gens, G.order) if gens else [G.identity]
    return PermGroup(n=G.n, elements=tuple(elems), generators=gens, name=name)


def symmetric(n: int) -> PermGroup:
    gens = []
    if n >= 2:
        gens.append(Perm.from_cycles(n, [(0, 1)]))
    if n >= 3:
        gens.append(Perm.from_cycles(n, [tuple(range(n))]))
    return build_group(n, gens, name=f"S{n}")


def alternating(n: int) -> PermGroup:
    gens = [Perm.from_cycles(n, [(0, 1, k)]) for k in range(2, n)]
    return build_group(n, gens, name=f"A{n}")


def cyclic(n: int) -> PermGroup:
    """``C_n`` in its regular representation, generated by ``i -> i+1 mod n``."""
    gens = [Perm(tuple((i + 1) % n for i in range(n)))] if n > 1 else []
    return build_group(n, gens, name=f"C{n}")


def dihedral(m: int) -> PermGroup:
    """Symmetries of the ``m``-gon on its vertices ``0..m-1``.

    Generated by the rotation ``i -> i+1`` and the reflection ``i -> -i``,
    which fixes vertex 0 (for odd ``m`` every reflection fixes one vertex).
    """
    if m < 3:
        raise ValidationError("dihedral groups here need at least 3 vertices")
    rot = Perm(tuple((i + 1) % m for i in range(m)))
    ref = Perm(tuple((-i) % m for i in range(m)))
    return build_group(m, [rot, ref], name=f"D{m}")


def klein_four() -> PermGroup:
    """``V_4`` acting regularly on four points."""
    a = Perm.from_cycles(4, [(0, 1), (2, 3)])
    b = Perm.from_cycles(4, [(0, 2), (1, 3)])
    return build_group(4, [a, b], name="V4")


def trivial_group(n: int = 1) -> PermGroup:
    return build_group(n, [], name="1")


PRESET_PATTERN = re.compile(r"^(S|A|C|D)(\d+)$|^V4$")


def preset(name: str) -> PermGroup:
    """Look up a named preset: ``S<n>``, ``A<n>``, ``C<n>``, ``D<m>`` or ``V4``."""
    key = name.strip().upper()
    if key in ("V4", "K4"):
        return klein_four()
    m = PRESET_PATTERN.match(key)
    if not m:
        raise ValidationError(f"unknown group preset {name!r}")
    kind, num = m.group(1), int(m.group(2))
    builders = {"S": symmetric, "A": alternating, "C": cyclic, "D": dihedral}
    if num < 1:
        raise ValidationError("preset degree must be positive")
    return builders[kind](num)


# ---------------------------------------------------------------------------
# classes and element statistics


def _class_key(c: ConjClass) -> tuple:
    ct = c.cycle_type
    ind = sum(ct) - len(ct)
    return (ind, tuple(-k for k in ct), c.representative.images)


def conjugacy_classes(G: PermGroup) -> list[ConjClass]:
    """Classes ordered by ``ind``, then cycle type (longer cycles first), then representative."""
    gens = G.generators or G.elements
    ginv = [(s, s.inverse()) for s in gens]
    assigned: set[Perm] = set()
    classes: list[ConjClass] = []
    for x in G.elements:
        if x in assigned:
            continue
        orbit = {x}
        queue = deque([x])
        while queue:
            y = queue.popleft()
            for s, si in ginv:
                z = s * y * si
                if z not in orbit:
                    orbit.add(z)
                    queue.append(z)
        assigned |= orbit
        members = tuple(sorted(orbit))
        classes.append(ConjClass(members[0], members, members[0].cycle_type))
    classes.sort(key=_class_key)
    return classes


def class_of(G: PermGroup, g: Perm) -> ConjClass:
    G.index(g)
    for c in G.classes:
        if g in c.members:
            return c
    raise MembershipError(f"{g!r} is in no class")  # pragma: no cover


def element_data(G: PermGroup, g: Perm) -> ElementData:
    G.index(g)
    order = g.order
    k = g.orbit_count
    return ElementData(order=order, orbit_count_points=k, ind=G.n - k, regular_orbit_count=G.order // order)


def malle_exponent(G: PermGroup) -> Fraction:
    """``1 / min ind(g)`` over non-identity ``g``; 0 for the trivial group."""
    inds = [g.ind for g in G.elements if not g.is_identity()]
    if not inds:
        return Fraction(0)
    return Fraction(1, min(inds))


# ---------------------------------------------------------------------------
# subgroups and quotients


def is_normal(G: PermGroup, H: PermGroup) -> bool:
    hs = set(H.elements)
    if not hs <= set(G.elements):
        return False
    if len(G) % len(H):
        return False
    for g in G.generators or G.elements:
        gi = g.inverse()
        for h in H.generators or H.elements:
            if g * h * gi not in hs:
                return False
    # closure check: H must be a group
    for a in H.generators or H.elements:
        for b in H.elements:
            if a * b not in hs:
                return False
    return True


def normal_subgroups(G: PermGroup) -> list[PermGroup]:
    """Every normal subgroup, ordered by size then element listing.

    Each normal subgroup is the join of the normal closures of the classes it
    contains, so closing the set of class closures under joins finds them all.
    """
    index = G._index
    trivial = frozenset([index[G.identity]])
    gensets: dict[frozenset[int], tuple[Perm, ...]] = {trivial: ()}
    closures: list[frozenset[int]] = []
    for c in G.classes:
        H = subgroup(G, c.members)
        key = frozenset(index[h] for h in H.elements)
        closures.append(key)
        gensets.setdefault(key, _small_generating_set(G.n, H.elements))
    frontier = list(gensets)
    while frontier:
        new: list[frozenset[int]] = []
        for a in frontier:
            for b in closures:
                if b <= a:
                    continue
                gens = gensets[a] + gensets[b]
                J = frozenset(index[h] for h in _closure(G.n, gens, G.order))
                if J not in gensets:
                    gensets[J] = _small_generating_set(G.n, [G.elements[i] for i in J])
                    new.append(J)
        frontier = new
    ordered = sorted(gensets, key=lambda s: (len(s), sorted(s)))
    return [
        PermGroup(n=G.n, elements=tuple(G.elements[i] for i in sorted(s)), generators=gensets[s])
        for s in ordered
    ]


def _small_generating_set(n: int, elems: Sequence[Perm]) -> tuple[Perm, ...]:
    target = len(elems)
    gens: list[Perm] = []
    current = {Perm.identity(n)}
    for g in sorted(elems, key=lambda p: (-p.order, p.images)):
        if len(current) == target:
            break
        if g not in current:
            gens.append(g)
            current = set(_closure(n, gens, target))
    return tuple(gens)


def quotient_order(G: PermGroup, H: PermGroup, g: Perm) -> int:
    """Order of ``gH`` in ``G/H``: least ``m >= 1`` with ``g^m`` in ``H``."""
    if not is_normal(G, H):
        raise ValidationError("subgroup is not normal")
    G.index(g)
    hs = set(H.elements)
    x = g
    m = 1
    while x not in hs:
        x = x * g
        m += 1
    return m


def generates(G: PermGroup, S: Iterable) -> bool:
    """Whether the elements (or classes of elements) in ``S`` generate ``G``."""
    elems: list[Perm] = []
    for item in S:
        if isinstance(item, ConjClass):
            elems.extend(item.members)
        else:
            elems.append(item)
    if not elems:
        return G.order == 1
    for g in elems:
        G.index(g)
    return len(_closure(G.n, sorted(set(elems)), G.order)) == G.order
