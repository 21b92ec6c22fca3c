"""Discriminant exponents of tamely ramified primes.

For a prime whose inertia group is generated by ``pi`` the exponent of the
prime in the discriminant of

* the degree-``n`` field ``K`` is ``n - (orbits of pi on n points)``;
* the Galois closure is ``|G| - |G| / ord(pi)``;
* the fixed field of a normal subgroup ``H`` is ``|G/H| - |G/H| / ord(pi H)``.

This module evaluates those exponents, assembles the six reference tables
for the standard preset groups, brackets the closure/field exponent ratio,
and derives the exponent relations between ``D_K`` and ``D_F``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from . import permgroup as pg
from .errors import ConsistencyError, ValidationError
from .permgroup import ConjClass, Perm, PermGroup
from .primes import is_prime


@dataclass(frozen=True)
class TameExponents:
    e_K: int
    e_closure: int
    e_fixed: tuple[int, ...]

    def as_tuple(self) -> tuple[int, ...]:
        return (self.e_K, self.e_closure, *self.e_fixed)


@dataclass(frozen=True)
class InertiaSpec:
    classes: tuple[ConjClass, ...]

    def __post_init__(self) -> None:
        if not self.classes:
            raise ValidationError("an inertia type needs at least one class")

    @property
    def elements(self) -> tuple[Perm, ...]:
        return tuple(g for c in self.classes for g in c.members)


@dataclass(frozen=True)
class RamRow:
    label: str
    representative: Perm
    exponents: tuple[int, ...]


@dataclass(frozen=True)
class RamTable:
    name: str
    group: PermGroup
    columns: tuple[str, ...]
    fixed_field_subgroups: tuple[PermGroup, ...]
    rows: tuple[RamRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("class",) + self.columns)
        for r in self.rows:
            writer.writerow((r.label, *r.exponents))
        return buf.getvalue()

    def to_text(self) -> str:
        header = ("class",) + self.columns
        body = [[r.label] + [str(v) for v in r.exponents] for r in self.rows]
        widths = [max(len(row[i]) for row in [list(header)] + body) for i in range(len(header))]
        fmt = lambda cells: "  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths)))
        rule = "  ".join("-" * w for w in widths)
        return "\n".join([f"{self.name}", fmt(header), rule] + [fmt(b) for b in body]) + "\n"


@dataclass(frozen=True)
class RatioBounds:
    min_ratio: Fraction
    max_ratio: Fraction
    lower_bracket: Fraction
    upper_bracket: Fraction
    within_bracket: bool
    wild_constant_log: float


@dataclass(frozen=True)
class ClassRatio:
    label: str
    e_K: int
    e_F: int
    ratio: Fraction | None


@dataclass(frozen=True)
class MultRelation:
    subgroup: PermGroup
    inertia: InertiaSpec
    exponent_ratio: Fraction | None
    controlled: bool
    family_valid: bool
    per_class: tuple[ClassRatio, ...]


# ---------------------------------------------------------------------------
# exponents


def tame_exponents(G: PermGroup, n: int, H_list: Sequence[PermGroup], pi: Perm) -> TameExponents:
    G.index(pi)
    e_K = n - pi.orbit_count
    e_closure = G.order - G.order // pi.order
    fixed = []
    for H in H_list:
        q = G.order // H.order
        fixed.append(q - q // pg.quotient_order(G, H, pi))
    return TameExponents(e_K, e_closure, tuple(fixed))


def class_exponents(G: PermGroup, n: int, H_list: Sequence[PermGroup], members: Sequence[Perm]) -> TameExponents:
    """Exponents shared by every element of ``members``; raises if they disagree."""
    values = {tame_exponents(G, n, H_list, g) for g in members}
    if len(values) != 1:
        raise ConsistencyError("class members give different discriminant exponents")
    return values.pop()


def disc_ratio_bounds(G: PermGroup, n: int | None = None) -> RatioBounds:
    """Extremes of ``e_closure / e_K`` over non-identity elements.

    For a transitive group both extremes sit inside ``[|G|/n, |G|/2]``. The
    wild-prime constant ``|G|^(2 n^2 log|G|)`` is returned as its natural log.
    """
    n = G.n if n is None else n
    ratios = []
    for g in G.elements:
        if g.is_identity():
            continue
        e_K = n - g.orbit_count
        ratios.append(Fraction(G.order - G.order // g.order, e_K))
    if not ratios:
        raise ValidationError("ratio bounds need a nontrivial group")
    lo, hi = Fraction(G.order, n), Fraction(G.order, 2)
    mn, mx = min(ratios), max(ratios)
    log_g = math.log(G.order)
    return RatioBounds(mn, mx, lo, hi, lo <= mn and mx <= hi, 2 * n * n * log_g * log_g)


def mult_relation(G: PermGroup, n: int, H: PermGroup, inertia: InertiaSpec) -> MultRelation:
    """Exponent ``r`` with ``D_K = D_F^r`` on tame parts, when every inertia class forces it.

    The relation is controlled only when each class in the inertia type ramifies
    in ``F`` and all classes give the same ratio. An inertia type that does not
    generate ``G`` is rejected unless the relation is already uncontrolled, so a
    controlled ratio is never reported for an invalid family.
    """
    valid = pg.generates(G, inertia.classes)
    per_class = []
    for c in inertia.classes:
        ex = class_exponents(G, n, [H], c.members)
        e_F = ex.e_fixed[0]
        per_class.append(ClassRatio(c.label(), ex.e_K, e_F, Fraction(ex.e_K, e_F) if e_F else None))
    ratios = {pc.ratio for pc in per_class}
    zero = None in ratios
    if not valid and not zero:
        raise ValidationError("inertia classes do not generate the group")
    if zero or len(ratios) != 1:
        return MultRelation(H, inertia, None, False, valid, tuple(per_class))
    return MultRelation(H, inertia, ratios.pop(), True, valid, tuple(per_class))


# ---------------------------------------------------------------------------
# preset subgroups and inertia types


def _sub(G: PermGroup, cycles_list: Sequence[Sequence[Sequence[int]]], name: str) -> PermGroup:
    gens = [Perm.from_cycles(G.n, cyc) for cyc in cycles_list]
    H = pg.subgroup(G, gens, name=name)
    return PermGroup(n=H.n, elements=H.elements, generators=H.generators, name=name)


def _cyclic_subgroup(G: PermGroup, g: Perm, name: str) -> PermGroup:
    H = pg.subgroup(G, [g])
    return PermGroup(n=H.n, elements=H.elements, generators=H.generators, name=name)


def named_subgroups(G: PermGroup) -> dict[str, PermGroup]:
    """Normal subgroups with conventional names, for the supported presets."""
    name = G.name or ""
    out: dict[str, PermGroup] = {}
    kind, num = name[:1], name[1:]
    if kind == "S" and num.isdigit():
        n = int(num)
        An = pg.alternating(n)
        out[f"A{n}"] = PermGroup(n=n, elements=An.elements, generators=An.generators, name=f"A{n}")
        if n == 4:
            out["K4"] = _sub(G, [[(0, 1), (2, 3)], [(0, 2), (1, 3)]], "K4")
    elif kind == "A" and num == "4":
        out["K4"] = _sub(G, [[(0, 1), (2, 3)], [(0, 2), (1, 3)]], "K4")
    elif name == "D4":
        out["C4"] = _sub(G, [[(0, 1, 2, 3)]], "C4")
        out["K4"] = _sub(G, [[(0, 2)], [(1, 3)]], "K4")
        out["K4'"] = _sub(G, [[(0, 1), (2, 3)], [(0, 2), (1, 3)]], "K4'")
    elif kind == "D" and num.isdigit():
        p = int(num)
        out[f"C{p}"] = _sub(G, [[tuple(range(p))]], f"C{p}")
    elif kind == "C" and num.isdigit():
        n = int(num)
        gen = Perm(tuple((i + 1) % n for i in range(n)))
        for m in range(2, n):
            if n % m == 0:
                out[f"C{m}"] = _cyclic_subgroup(G, gen ** (n // m), f"C{m}")
    return out


def irrep_kernels(G: PermGroup) -> list[PermGroup]:
    """Proper nontrivial normal subgroups that are kernels of irreducible representations.

    Irreducible representations are not computed; the lists are fixed per
    preset family. Simple groups have none.
    """
    name = G.name or ""
    subs = named_subgroups(G)
    if name == "S4":
        return [subs["K4"], subs["A4"]]
    if name.startswith("S") and name[1:].isdigit() and int(name[1:]) >= 3:
        return [subs[f"A{name[1:]}"]]
    if name == "A4":
        return [subs["K4"]]
    if name == "D4":
        return [subs["C4"], subs["K4"], subs["K4'"]]
    if name.startswith("D"):
        return [subs[f"C{name[1:]}"]]
    if name.startswith("C"):
        return list(subs.values())
    if name.startswith("A"):
        return []
    raise ValidationError(f"no kernel list recorded for {name or 'an unnamed group'}")


def inertia_type(G: PermGroup) -> InertiaSpec:
    """The inertia type attached to each preset family.

    Transpositions for ``S_n``, reflections for ``D_p``, generators for
    ``C_n``, both classes of 3-cycles for ``A_4``.
    """
    name = G.name or ""
    cls = G.classes
    if name.startswith("S"):
        chosen = [c for c in cls if c.cycle_type[:1] == (2,) and c.cycle_type.count(2) == 1]
    elif name == "A4":
        chosen = [c for c in cls if c.cycle_type == (3, 1)]
    elif name.startswith("D"):
        rotations = named_subgroups(G)[f"C{G.n}"]
        chosen = [c for c in cls if c.representative.order == 2 and c.representative not in rotations]
    elif name.startswith("C"):
        chosen = [c for c in cls if c.representative.order == G.order]
    else:
        raise ValidationError(f"no inertia type recorded for {name or 'an unnamed group'}")
    return InertiaSpec(tuple(chosen))


# ---------------------------------------------------------------------------
# reference tables


def _row(G: PermGroup, n: int, Hs: Sequence[PermGroup], rep: Perm, label: str | None = None) -> RamRow:
    cls = pg.class_of(G, rep)
    ex = class_exponents(G, n, Hs, cls.members)
    return RamRow(label or rep.label(), rep, ex.as_tuple())


def _cyc(n: int, *cycles: Sequence[int]) -> Perm:
    return Perm.from_cycles(n, cycles)


def ram_table(preset: str, param: int | None = None) -> RamTable:
    """Rebuild one of the six reference exponent tables.

    ``preset`` is one of ``Sn`` (with ``param = n``), ``S4``, ``A4``, ``Dp``
    (``param = p``, an odd prime), ``C2p`` (``param = p``, an odd prime), ``D4``.
    """
    key = preset.strip().lower()
    if key == "sn":
        if param is None or param < 3:
            raise ValidationError("Sn table needs n >= 3")
        n = param
        G = pg.symmetric(n)
        H = named_subgroups(G)[f"A{n}"]
        reps = [_cyc(n), _cyc(n, (0, 1)), _cyc(n, (0, 1, 2))]
        if n >= 4:
            reps.append(_cyc(n, (0, 1), (2, 3)))
        if n >= 4:
            reps.append(_cyc(n, tuple(range(n))))
        rows = [_row(G, n, [H], r) for r in reps]
        return RamTable(f"S{n}", G, ("K", "K~", f"K~^A{n}"), (H,), tuple(rows))
    if key == "s4":
        G = pg.symmetric(4)
        subs = named_subgroups(G)
        Hs = [subs["K4"], subs["A4"]]
        reps = [_cyc(4), _cyc(4, (0, 1)), _cyc(4, (0, 1, 2)), _cyc(4, (0, 1), (2, 3)), _cyc(4, (0, 1, 2, 3))]
        rows = [_row(G, 4, Hs, r) for r in reps]
        return RamTable("S4", G, ("K", "K~", "K~^K4", "K~^A4"), tuple(Hs), tuple(rows))
    if key == "a4":
        G = pg.alternating(4)
        Hs = [named_subgroups(G)["K4"]]
        reps = [_cyc(4), _cyc(4, (0, 1, 2)), _cyc(4, (0, 2, 1)), _cyc(4, (0, 1), (2, 3))]
        rows = [_row(G, 4, Hs, r) for r in reps]
        return RamTable("A4", G, ("K", "K~", "K~^K4"), tuple(Hs), tuple(rows))
    if key == "dp":
        p = _odd_prime(param)
        G = pg.dihedral(p)
        Hs = [named_subgroups(G)[f"C{p}"]]
        reflection = Perm(tuple((-i) % p for i in range(p)))
        rot = Perm(tuple((i + 1) % p for i in range(p)))
        reps = [_cyc(p), reflection] + [rot**k for k in range(1, (p - 1) // 2 + 1)]
        rows = [_row(G, p, Hs, r) for r in reps]
        return RamTable(f"D{p}", G, ("K", "K~", f"K~^C{p}"), tuple(Hs), tuple(rows))
    if key == "c2p":
        p = _odd_prime(param)
        n = 2 * p
        G = pg.cyclic(n)
        subs = named_subgroups(G)
        Hs = [subs["C2"], subs[f"C{p}"]]
        gen = Perm(tuple((i + 1) % n for i in range(n)))
        rows = []
        for a, b in ((0, 0), (1, 0), (0, 1), (1, 1)):
            k = next(k for k in range(n) if k % 2 == a and k % p == b)
            members = [gen**j for j in range(n) if j % 2 == a and (j % p == 0) == (b == 0)]
            ex = class_exponents(G, n, Hs, members)
            rows.append(RamRow(f"({a},{b})", gen**k, (ex.e_closure, *ex.e_fixed)))
        return RamTable(f"C{n}", G, ("K=K~", "K~^C2", f"K~^C{p}"), tuple(Hs), tuple(rows))
    if key == "d4":
        G = pg.dihedral(4)
        subs = named_subgroups(G)
        Hs = [subs["C4"], subs["K4"], subs["K4'"]]
        reps = [_cyc(4), _cyc(4, (0, 2), (1, 3)), _cyc(4, (0, 2)), _cyc(4, (0, 1), (2, 3)), _cyc(4, (0, 1, 2, 3))]
        rows = [_row(G, 4, Hs, r) for r in reps]
        return RamTable("D4", G, ("K", "K~", "K~^C4", "K~^K4", "K~^K4'"), tuple(Hs), tuple(rows))
    raise ValidationError(f"unknown table preset {preset!r}")


def _odd_prime(p: int | None) -> int:
    if p is None or p < 3 or not is_prime(p):
        raise ValidationError("parameter must be an odd prime")
    return p
