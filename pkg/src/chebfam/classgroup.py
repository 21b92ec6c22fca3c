"""Class groups of imaginary quadratic fields from reduced binary quadratic forms.

A form ``(a, b, c)`` stands for ``a x^2 + b x y + c y^2`` with discriminant
``b^2 - 4 a c = D < 0``. Proper equivalence classes of primitive forms are in
bijection with ideal classes of the order of discriminant ``D``; for
fundamental ``D`` that order is the full ring of integers.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import CapExceededError, ValidationError
from .primes import distinct_prime_count, factorize, is_fundamental, primes_up_to

DISC_CAP = 10**8
TABLE_CAP = 10**4


class QForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self
        if not (abs(b) <= a <= c):
            return False
        if b < 0 and (a == -b or a == c):
            return False
        return True


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, x, y)`` with ``x a + y b = g = gcd(a, b)``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def reduce_form(f: QForm) -> QForm:
    """The unique reduced form properly equivalent to a positive definite ``f``."""
    a, b, c = f
    D = b * b - 4 * a * c
    if a <= 0 or D >= 0:
        raise ValidationError("reduction needs a positive definite form")
    while True:
        if not (-a < b <= a):
            r = b % (2 * a)
            if r > a:
                r -= 2 * a
            b = r
            c = (b * b - D) // (4 * a)
        if a > c:
            a, b, c = c, -b, a
            continue
        if b < 0 and (a == c or a == -b):
            b = -b
        return QForm(a, b, c)


def compose(f: QForm, g: QForm) -> QForm:
    """Gaussian composition followed by reduction."""
    a1, b1, _ = f
    a2, b2, c2 = g
    if a1 > a2:
        a1, b1, _, a2, b2, c2 = a2, b2, c2, a1, b1, f.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, y1, _ = _xgcd(a2, a1)
    if s % d == 0:
        x2, y2, d1 = 0, -1, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return reduce_form(QForm(a3, b3, c3))


def identity_form(D: int) -> QForm:
    b = D % 2
    return QForm(1, b, (b * b - D) // 4)


def inverse(f: QForm) -> QForm:
    return reduce_form(QForm(f.a, -f.b, f.c))


def power(f: QForm, k: int) -> QForm:
    if k < 0:
        return power(inverse(f), -k)
    out = identity_form(f.disc)
    base = f
    while k:
        if k & 1:
            out = compose(out, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return out


def reduced_forms(D: int) -> list[QForm]:
    """All reduced primitive forms of discriminant ``D``, ordered by ``(a, b)``."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValidationError(f"{D} is not a negative discriminant")
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                out.append(QForm(a, b, c))
        a += 1
    return out


def check_fundamental(D: int) -> None:
    if D >= 0 or not is_fundamental(D):
        raise ValidationError(f"{D} is not a negative fundamental discriminant")
    if -D > DISC_CAP:
        raise CapExceededError(f"|D| = {-D} exceeds cap {DISC_CAP}")


@dataclass(frozen=True)
class ClassGroupRecord:
    D: int
    forms: tuple[QForm, ...]
    invariants: tuple[int, ...]
    generators: tuple[QForm, ...]
    _index: dict[QForm, int] = field(repr=False, compare=False, default_factory=dict)

    @property
    def h(self) -> int:
        return len(self.forms)

    @property
    def identity(self) -> QForm:
        return identity_form(self.D)

    def index(self, f: QForm) -> int:
        return self._index[f]

    def torsion(self, ell: int) -> int:
        """``#{g : g^ell = 1}``."""
        if ell < 1:
            raise ValidationError("ell must be positive")
        e = self.identity
        ell_eff = math.gcd(ell, _exponent(self.invariants))
        return sum(1 for f in self.forms if power(f, ell_eff) == e)


def _exponent(invariants: tuple[int, ...]) -> int:
    return invariants[-1] if invariants else 1


def _primary_exponents(forms: list[QForm], h: int, q: int, D: int) -> list[int]:
    """Exponents ``e_i`` of the ``q``-primary part ``prod Z/q^e_i``, descending."""
    v = 0
    m = h
    while m % q == 0:
        m //= q
        v += 1
    e = identity_form(D)
    counts = [0] * (v + 1)
    for f in forms:
        g = power(f, m)
        j = 0
        while g != e:
            g = power(g, q)
            j += 1
        counts[j] += 1
    # N(q^j) = #{x : x^(q^j) = 1}; log_q N(q^j) - log_q N(q^(j-1)) = #{i : e_i >= j}
    cum = 0
    logs = []
    for j in range(v + 1):
        cum += counts[j]
        logs.append(round(math.log(cum, q)))
    at_least = [logs[j] - logs[j - 1] for j in range(1, v + 1)]
    exps = []
    for j in range(v, 0, -1):
        ge_j = at_least[j - 1]
        ge_next = at_least[j] if j < v else 0
        exps.extend([j] * (ge_j - ge_next))
    return sorted(exps, reverse=True)


def _invariant_factors(forms: list[QForm], D: int) -> tuple[int, ...]:
    h = len(forms)
    if h == 1:
        return ()
    per_prime = {q: _primary_exponents(forms, h, q, D) for q, _ in factorize(h)}
    rank = max(len(v) for v in per_prime.values())
    out = []
    for k in range(rank):
        d = 1
        for q, exps in per_prime.items():
            if k < len(exps):
                d *= q ** exps[k]
        out.append(d)
    return tuple(sorted(out))


def _greedy_generators(forms: list[QForm], D: int) -> tuple[QForm, ...]:
    e = identity_form(D)
    sub = {e}
    gens = []
    for f in forms:
        if f in sub:
            continue
        gens.append(f)
        layer = set(sub)
        g = f
        while g not in sub:
            layer |= {compose(x, g) for x in sub}
            g = compose(g, f)
        sub = layer
        if len(sub) == len(forms):
            break
    return tuple(gens)


@lru_cache(maxsize=8192)
def class_group(D: int) -> ClassGroupRecord:
    """Reduced forms, invariant factors ``d_1 | d_2 | ...`` and a generating set."""
    check_fundamental(D)
    forms = reduced_forms(D)
    inv = _invariant_factors(forms, D)
    if math.prod(inv) != len(forms):
        raise ValidationError(f"structure of discriminant {D} does not multiply out to h")
    gens = _greedy_generators(forms, D)
    return ClassGroupRecord(D, tuple(forms), inv, gens, {f: i for i, f in enumerate(forms)})


def group_table(rec: ClassGroupRecord, cap: int = TABLE_CAP) -> np.ndarray:
    """Full composition table as form indices; row ``i`` column ``j`` holds ``forms[i] * forms[j]``."""
    if rec.h > cap:
        raise CapExceededError(f"h = {rec.h} exceeds table cap {cap}")
    h = rec.h
    table = np.empty((h, h), dtype=np.int64)
    for i, f in enumerate(rec.forms):
        for j in range(i, h):
            k = rec._index.get(compose(f, rec.forms[j]))
            if k is None:
                raise ValidationError("composition left the set of reduced forms")
            table[i, j] = table[j, i] = k
    return table


@dataclass(frozen=True)
class GroupCheck:
    closed: bool
    identity: bool
    inverses: bool
    commutative: bool
    associative: bool

    @property
    def ok(self) -> bool:
        return self.closed and self.identity and self.inverses and self.commutative and self.associative


def verify_group(rec: ClassGroupRecord, cap: int = TABLE_CAP) -> GroupCheck:
    """Check the composition table against the group axioms.

    Associativity uses Light's test on the generating set: if left and right
    multiplication by every generator commute with the table, the whole table
    is associative.
    """
    h = rec.h
    table = np.empty((h, h), dtype=np.int64)
    closed = True
    for i, f in enumerate(rec.forms):
        for j, g in enumerate(rec.forms):
            k = rec._index.get(compose(f, g))
            if k is None:
                closed = False
                k = 0
            table[i, j] = k
    e = rec.index(rec.identity)
    identity = bool(np.array_equal(table[e], np.arange(h)) and np.array_equal(table[:, e], np.arange(h)))
    inverses = all(len(set(row)) == h for row in table.tolist()) and bool((table == e).any(axis=1).all())
    commutative = bool(np.array_equal(table, table.T))
    associative = True
    for g in rec.generators:
        gi = rec.index(g)
        # (x g) y == x (g y) for all x, y
        left = table[table[:, gi]]
        right = table[:, table[gi]]
        if not np.array_equal(left, right):
            associative = False
            break
    return GroupCheck(closed, identity, inverses, commutative, associative)


def ell_torsion(D: int, ell: int) -> int:
    """``|Cl[ell]|`` for the imaginary quadratic field of discriminant ``D``."""
    return class_group(D).torsion(ell)


def genus_two_rank(D: int) -> int:
    """``2^(nu - 1)`` with ``nu`` the number of distinct primes dividing ``D``."""
    return 2 ** (distinct_prime_count(D) - 1)


def fundamental_discriminants(lo: int, hi: int) -> Iterator[int]:
    """Negative fundamental discriminants ``D`` with ``lo <= D <= hi``, descending from ``hi``."""
    for D in range(min(hi, -3), lo - 1, -1):
        if is_fundamental(D):
            yield D


@dataclass(frozen=True)
class TorsionStats:
    X: int
    ell: int
    k: int
    moment: int
    count: int
    exceptional: int


def torsion_stats(X: int, ell: int, k: int) -> TorsionStats:
    """Moment of ``|Cl[ell]|^k`` over fundamental ``-X <= D < 0``.

    ``exceptional`` counts discriminants with ``|Cl[ell]| > |D|^(1/2 - 1/(2 ell))``.
    """
    if ell < 1 or k < 1:
        raise ValidationError("ell and k must be positive")
    moment = count = exceptional = 0
    if X < 3:
        return TorsionStats(X, ell, k, 0, 0, 0)
    if X > DISC_CAP:
        raise CapExceededError(f"X = {X} exceeds cap {DISC_CAP}")
    expo = 0.5 - 1.0 / (2 * ell)
    for D in fundamental_discriminants(-X, -1):
        t = ell_torsion(D, ell)
        moment += t**k
        count += 1
        if t > (-D) ** expo:
            exceptional += 1
    return TorsionStats(X, ell, k, moment, count, exceptional)


# ---------------------------------------------------------------------------
# cubic fields versus 3-torsion


FINGERPRINT_PRIMES = 100


@dataclass(frozen=True)
class CorrespondenceRow:
    D: int
    cubic_fields: int
    torsion_prediction: int
    match: bool


@dataclass(frozen=True)
class CorrespondenceReport:
    X: int
    height: int
    rows: tuple[CorrespondenceRow, ...]
    stable: bool

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.rows)


def _cubic_disc(a, b, c, d):
    return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d


def _d_range(a: int, b: int, c: int, X: int) -> list[int]:
    """Integers ``d`` with ``-X <= disc(a, b, c, d) < 0``; the discriminant is a downward parabola in ``d``."""
    A = -27 * a * a
    B = 18 * a * b * c - 4 * b**3
    C = b * b * c * c - 4 * a * c**3
    vertex = -B / (2 * A)
    # outer window: disc >= -X
    disc_outer = B * B - 4 * A * (C + X)
    if disc_outer < 0:
        return []
    w = math.sqrt(disc_outer) / (2 * abs(A))
    lo, hi = math.floor(vertex - w) - 1, math.ceil(vertex + w) + 1
    out = []
    for d in range(lo, hi + 1):
        v = _cubic_disc(a, b, c, d)
        if -X <= v < 0:
            out.append(d)
    return out


def _forms_up_to(X: int, H: int) -> np.ndarray:
    """Cubic forms ``(a, b, c, d)`` with ``1 <= a <= (16 X / 27)^(1/4)``, ``-3a/2 < b <= 3a/2``,
    ``|c| <= H`` and ``-X <= disc < 0``."""
    amax = int((16 * X / 27) ** 0.25) + 1
    rows = []
    for a in range(1, amax + 1):
        for b in range((-3 * a) // 2 + 1, (3 * a) // 2 + 1):
            for c in range(-H, H + 1):
                for d in _d_range(a, b, c, X):
                    rows.append((a, b, c, d))
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def _projective_root_counts(forms: np.ndarray, primes: np.ndarray) -> np.ndarray:
    """Number of roots in the projective line over ``F_p`` of each cubic form, per prime."""
    out = np.zeros((forms.shape[0], primes.size), dtype=np.int8)
    a, b, c, d = (forms[:, i][:, None] for i in range(4))
    for j, p in enumerate(primes.tolist()):
        x = np.arange(p, dtype=np.int64)[None, :]
        val = (((a * x + b) % p * x + c) % p * x + d) % p
        out[:, j] = (val == 0).sum(axis=1) + (forms[:, 0] % p == 0)
    return out


def _has_rational_root(a: int, b: int, c: int, d: int) -> bool:
    if d == 0:
        return True
    for q in _divs(a):
        for r in _divs(d):
            if math.gcd(q, r) != 1:
                continue
            for s in (r, -r):
                if a * s**3 + b * s * s * q + c * s * q * q + d * q**3 == 0:
                    return True
    return False


def _divs(n: int) -> list[int]:
    n = abs(n)
    return [k for k in range(1, n + 1) if n % k == 0]


def cubic_field_counts(X: int, H: int, fingerprint_primes: int = FINGERPRINT_PRIMES) -> dict[int, int]:
    """Number of cubic fields of each fundamental discriminant ``-X <= D < 0`` found with ``|c| <= H``.

    Fields are told apart by their projective root counts modulo a fixed
    list of primes, which determine the splitting type at each prime.
    """
    forms = _forms_up_to(X, H)
    if forms.size == 0:
        return {}
    discs = _cubic_disc(*(forms[:, i].astype(object) for i in range(4)))
    fund = np.array([is_fundamental(int(v)) for v in discs], dtype=bool)
    forms = forms[fund]
    discs = discs[fund]
    primes = primes_up_to(10_000)[:fingerprint_primes]
    counts = _projective_root_counts(forms, primes)
    seen: dict[int, set[bytes]] = defaultdict(set)
    for i in range(forms.shape[0]):
        row = counts[i]
        if (row > 0).all() and _has_rational_root(*(int(v) for v in forms[i])):
            continue
        seen[int(discs[i])].add(row.tobytes())
    return {D: len(v) for D, v in seen.items()}


def cubic_correspondence(X: int, H: int | None = None, max_height: int = 400) -> CorrespondenceReport:
    """Pair cubic-field counts with ``(|Cl[3]| - 1) / 2`` for fundamental ``-X <= D < 0``.

    With ``H`` unset the coefficient bound doubles from 8 until two successive
    searches agree, up to ``max_height``; ``stable`` records whether that
    happened.
    """
    if X < 3:
        return CorrespondenceReport(X, 0, (), True)
    if H is not None:
        found, height, stable = cubic_field_counts(X, H), H, False
    else:
        height = 8
        found = cubic_field_counts(X, height)
        stable = False
        while height * 2 <= max_height:
            nxt = cubic_field_counts(X, height * 2)
            height *= 2
            if nxt == found:
                stable = True
                break
            found = nxt
    rows = []
    for D in sorted(fundamental_discriminants(-X, -1), reverse=True):
        pred = (ell_torsion(D, 3) - 1) // 2
        got = found.get(D, 0)
        rows.append(CorrespondenceRow(D, got, pred, got == pred))
    return CorrespondenceReport(X, height, tuple(rows), stable)
