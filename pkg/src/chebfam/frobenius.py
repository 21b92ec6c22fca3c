"""Frobenius cycle types and Chebotarev counting statistics.

For a monic-or-not integer polynomial ``f`` and a prime ``p`` not dividing
its discriminant or leading coefficient, the degrees of the irreducible
factors of ``f`` mod ``p`` are the cycle lengths of the Frobenius class on
the roots. Counting primes by that multiset gives the class-counting function
over rational primes, compared here with ``(|C|/|G|) Li(x)``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import permgroup as pg
from . import poly as P
from .errors import CapExceededError, ConsistencyError, RamifiedPrimeError, ValidationError
from .fields import galois_label
from .primes import SIEVE_CAP, is_prime, prime_blocks

Pattern = tuple[int, ...]


@dataclass(frozen=True)
class FrobeniusPattern:
    p: int
    parts: Pattern

    def __post_init__(self) -> None:
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValidationError("pattern parts must be in descending order")


def frobenius_pattern(f: Sequence[int], p: int) -> FrobeniusPattern:
    f = P.trim(f)
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if P.discriminant(f) % p == 0 or f[-1] % p == 0:
        raise RamifiedPrimeError(f"{p} divides the discriminant or leading coefficient")
    return FrobeniusPattern(p, P.factor_degrees_mod(f, p))


# ---------------------------------------------------------------------------
# groups attached to labels


_LABEL_GROUPS = {
    "C2": lambda: pg.cyclic(2),
    "C3": lambda: pg.cyclic(3),
    "S3": lambda: pg.symmetric(3),
    "C4": lambda: pg.cyclic(4),
    "K4": pg.klein_four,
    "V4": pg.klein_four,
    "D4": lambda: pg.dihedral(4),
    "A4": lambda: pg.alternating(4),
    "S4": lambda: pg.symmetric(4),
    "C5": lambda: pg.cyclic(5),
    "D5": lambda: pg.dihedral(5),
    "A5": lambda: pg.alternating(5),
    "S5": lambda: pg.symmetric(5),
}


@lru_cache(maxsize=None)
def group_for_label(label: str) -> pg.PermGroup:
    """The transitive permutation group a Galois label names, acting on the roots."""
    try:
        return _LABEL_GROUPS[label]()
    except KeyError:
        raise ValidationError(f"no permutation group recorded for label {label!r}") from None


@dataclass(frozen=True)
class CycleClass:
    """Union of the conjugacy classes sharing one cycle type."""

    cycle_type: Pattern
    size: int
    label: str
    merged: bool


def cycle_classes(G: pg.PermGroup) -> list[CycleClass]:
    """One entry per cycle type in ``G``, ordered like the conjugacy classes."""
    out: dict[Pattern, list[pg.ConjClass]] = {}
    for c in G.classes:
        out.setdefault(c.cycle_type, []).append(c)
    return [
        CycleClass(ct, sum(c.size for c in cs), "+".join(c.representative.label() for c in cs), len(cs) > 1)
        for ct, cs in out.items()
    ]


# ---------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class PatternCounts:
    grid: tuple[int, ...]
    counts: dict[Pattern, tuple[int, ...]]
    ramified: tuple[int, ...]
    prime_counts: tuple[int, ...]


def pattern_counts(f: Sequence[int], grid: Iterable[int], cap: int = SIEVE_CAP) -> PatternCounts:
    """Cumulative counts of every factorization pattern at each ``x`` in ``grid``.

    Primes dividing the discriminant or leading coefficient are tallied in
    ``ramified`` instead of a pattern.
    """
    f = P.trim(f)
    grid_t = tuple(sorted(int(x) for x in grid))
    if not grid_t:
        raise ValidationError("empty grid")
    xmax = grid_t[-1]
    if xmax > cap:
        raise CapExceededError(f"x = {xmax} exceeds sieve cap {cap}")
    disc = P.discriminant(f)
    bad = disc * f[-1]
    codes: dict[Pattern, int] = {}
    per_code: list[list[np.ndarray]] = []
    ram_primes: list[int] = []
    all_primes: list[np.ndarray] = []
    for block in prime_blocks(2, xmax, cap):
        all_primes.append(block)
        if abs(bad) < 2**62:
            mask = np.mod(np.int64(bad), block) != 0
        else:
            mask = np.array([bad % int(p) != 0 for p in block], dtype=bool)
        ram_primes.extend(int(p) for p in block[~mask])
        good = block[mask]
        pats = P.factor_patterns(f, good)
        local: dict[int, list[int]] = {}
        for p, pat in zip(good.tolist(), pats):
            code = codes.setdefault(pat, len(codes))
            local.setdefault(code, []).append(p)
        while len(per_code) < len(codes):
            per_code.append([])
        for code, ps in local.items():
            per_code[code].append(np.array(ps, dtype=np.int64))
    primes = np.concatenate(all_primes) if all_primes else np.zeros(0, dtype=np.int64)
    g = np.array(grid_t, dtype=np.int64)
    counts = {}
    for pat, code in codes.items():
        arr = np.concatenate(per_code[code])
        counts[pat] = tuple(int(v) for v in np.searchsorted(arr, g, side="right"))
    ram = np.array(sorted(ram_primes), dtype=np.int64)
    return PatternCounts(
        grid_t,
        dict(sorted(counts.items(), reverse=True)),
        tuple(int(v) for v in np.searchsorted(ram, g, side="right")),
        tuple(int(v) for v in np.searchsorted(primes, g, side="right")),
    )


def _normalize_spec(class_spec) -> list[Pattern]:
    if not class_spec:
        raise ValidationError("empty class specification")
    if isinstance(class_spec[0], int):
        specs = [tuple(class_spec)]
    else:
        specs = [tuple(s) for s in class_spec]
    return [tuple(sorted(s, reverse=True)) for s in specs]


def pi_class(f: Sequence[int], class_spec, x: int, group_label: str | None = None) -> int:
    """Unramified primes up to ``x`` whose Frobenius has the given cycle type(s).

    ``class_spec`` is one cycle type such as ``(1, 1, 1)`` or a list of them,
    counted as a union. Cycle types absent from the Galois group are rejected.
    """
    f = P.trim(f)
    specs = _normalize_spec(class_spec)
    n = P.degree(f)
    label = group_label or galois_label(f)
    allowed = None
    if label in _LABEL_GROUPS:
        allowed = {c.cycle_type for c in group_for_label(label).classes}
    for s in specs:
        if sum(s) != n:
            raise ValidationError(f"cycle type {s} is not a partition of {n}")
        if allowed is not None and s not in allowed:
            raise ValidationError(f"cycle type {s} does not occur in {label}")
    if x < 2:
        return 0
    pc = pattern_counts(f, [x])
    return sum(pc.counts.get(s, (0,))[0] for s in set(specs))


# ---------------------------------------------------------------------------
# logarithmic integral


def li(x: float) -> float:
    """``Li(x)``, the integral of ``1/log t`` from 2 to ``x``."""
    if x < 2:
        raise ValidationError("Li is taken from 2")
    if x == 2:
        return 0.0
    # split on a geometric ladder so each piece is smooth and short in log scale
    pts = [2.0]
    while pts[-1] * 16 < x:
        pts.append(pts[-1] * 16)
    pts.append(float(x))
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        val, _ = integrate.quad(lambda t: 1.0 / math.log(t), a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ClassStats:
    cycle_class: CycleClass
    counts: tuple[int, ...]
    main_terms: tuple[float, ...]
    normalized_errors: tuple[float, ...]
    ratios: tuple[float, ...]


@dataclass(frozen=True)
class ChebStats:
    group_label: str
    group_order: int
    grid: tuple[int, ...]
    classes: tuple[ClassStats, ...]
    ramified: tuple[int, ...]
    prime_counts: tuple[int, ...]

    def balanced(self) -> bool:
        """Class counts plus ramified primes give the prime count at every grid point."""
        return all(
            sum(c.counts[i] for c in self.classes) + self.ramified[i] == self.prime_counts[i]
            for i in range(len(self.grid))
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "class", "count", "main_term", "normalized_error"))
        for i, x in enumerate(self.grid):
            for c in self.classes:
                w.writerow((x, c.cycle_class.label, c.counts[i], f"{c.main_terms[i]:.6f}", f"{c.normalized_errors[i]:.8f}"))
        return buf.getvalue()


def chebotarev_report(f: Sequence[int], group_label: str | None, x_grid: Iterable[int], cap: int = SIEVE_CAP) -> ChebStats:
    """Per-class prime counts against ``(|C|/|G|) Li(x)`` on a grid.

    Classes sharing a cycle type are merged, and a pattern outside the group's
    cycle types raises ``ConsistencyError`` (the label does not fit ``f``).
    """
    f = P.trim(f)
    label = group_label or galois_label(f)
    G = group_for_label(label)
    if G.n != P.degree(f):
        raise ValidationError(f"{label} does not act on {P.degree(f)} points")
    pc = pattern_counts(f, x_grid, cap)
    classes = cycle_classes(G)
    known = {c.cycle_type for c in classes}
    stray = [pat for pat in pc.counts if pat not in known and any(pc.counts[pat])]
    if stray:
        raise ConsistencyError(f"patterns {stray} cannot occur in {label}; the label is wrong")
    lis = [li(x) if x >= 2 else 0.0 for x in pc.grid]
    out = []
    for c in classes:
        counts = pc.counts.get(c.cycle_type, (0,) * len(pc.grid))
        share = c.size / G.order
        mains = tuple(share * v for v in lis)
        errs = tuple(
            (k - m) / (x / math.log(x) ** 2) if x >= 2 else 0.0 for k, m, x in zip(counts, mains, pc.grid)
        )
        ratios = tuple(k / m if m > 0 else math.nan for k, m in zip(counts, mains))
        out.append(ClassStats(c, counts, mains, errs, ratios))
    return ChebStats(label, G.order, pc.grid, tuple(out), pc.ramified, pc.prime_counts)


@dataclass(frozen=True)
class SplitPrimeCheck:
    sigma: float
    bound: float
    split_count: int
    split_count_ok: bool
    lower_target: float
    dyadic_found: bool


def split_prime_checks(f: Sequence[int], sigma: float, cap: int = SIEVE_CAP) -> SplitPrimeCheck:
    """Completely split primes up to ``|D|^sigma`` and in the dyadic window above it."""
    if not 0 < sigma <= 1:
        raise ValidationError("sigma must lie in (0, 1]")
    f = P.trim(f)
    n = P.degree(f)
    y = abs(P.discriminant(f)) ** sigma
    if 2 * y > cap:
        raise CapExceededError(f"2|D|^sigma = {2 * y:.3g} exceeds sieve cap {cap}")
    split = (1,) * n
    lo, hi = math.floor(y), math.floor(2 * y)
    if hi < 2:
        return SplitPrimeCheck(sigma, y, 0, True, 0.0, False)
    pc = pattern_counts(f, [max(lo, 2), hi], cap)
    counts = pc.counts.get(split, (0, 0))
    below = counts[0] if lo >= 2 else 0
    target = y / math.log(y) if y > 1 else 0.0
    return SplitPrimeCheck(sigma, y, below, below <= y, target, counts[1] > below)
