"""Small number-field families: polynomial search, cyclic fields, census statistics.

Two constructions are offered. ``enumerate_squarefree_disc_fields`` walks a box
of monic integer polynomials and keeps those whose discriminant is square-free
(fundamental in degree 2), so the polynomial discriminant is the field
discriminant. ``cyclic_fields`` builds every cyclic field of odd prime degree
``p`` from its conductor, as the fixed field of an order-``p`` Dirichlet
character, using Gaussian periods with exact verification.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import poly as P
from .errors import ConstructionError, FitError, ValidationError
from .poly import Poly
from .primes import (
    factorize,
    is_fundamental,
    primes_up_to,
    primitive_root,
    squarefree_flags,
)

DEFAULT_FINGERPRINT = 100
QUARTIC_RESOLVENT_LABELS = ("C4", "K4", "D4", "A4", "S4")


@dataclass(frozen=True)
class FieldRecord:
    degree: int
    coeffs: Poly
    disc: int
    signature: tuple[int, int]
    label: str
    tags: tuple[str, ...] = ()

    @property
    def abs_disc(self) -> int:
        return abs(self.disc)

    @property
    def poly_str(self) -> str:
        return P.to_str(self.coeffs)

    def to_line(self) -> str:
        sig = f"{self.signature[0]},{self.signature[1]}"
        coeffs = ",".join(str(c) for c in self.coeffs)
        return f"{self.degree}|{self.disc}|{sig}|{self.label}|{coeffs}|{';'.join(self.tags)}"

    def to_json(self) -> str:
        """One newline-free JSON object with sorted keys."""
        return json.dumps(
            {
                "coeffs": list(self.coeffs),
                "degree": self.degree,
                "disc": self.disc,
                "label": self.label,
                "signature": list(self.signature),
                "tags": list(self.tags),
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> FieldRecord:
        try:
            obj = json.loads(text)
            return cls(
                degree=int(obj["degree"]),
                coeffs=tuple(int(c) for c in obj["coeffs"]),
                disc=int(obj["disc"]),
                signature=tuple(int(v) for v in obj["signature"]),
                label=str(obj["label"]),
                tags=tuple(str(t) for t in obj.get("tags", ())),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ValidationError(f"malformed field record: {text!r}") from exc

    @classmethod
    def from_line(cls, line: str) -> FieldRecord:
        parts = line.strip().split("|")
        if len(parts) != 6:
            raise ValidationError(f"malformed field record: {line!r}")
        deg, disc, sig, label, coeffs, tags = parts
        r1, r2 = (int(v) for v in sig.split(","))
        return cls(
            degree=int(deg),
            coeffs=tuple(int(c) for c in coeffs.split(",")),
            disc=int(disc),
            signature=(r1, r2),
            label=label,
            tags=tuple(t for t in tags.split(";") if t),
        )


# ---------------------------------------------------------------------------
# Galois labels


def galois_label(f: Sequence[int], sample_primes: int = 200) -> str:
    """Galois group of the splitting field of an irreducible ``f`` of degree at most 5.

    Degrees 2 to 4 are decided exactly. Degree 5 combines the discriminant
    square test with the cycle types seen at the first ``sample_primes``
    unramified primes, which is heuristic: a group is only excluded by the
    absence of a cycle type, never certified.
    """
    f = P.trim(f)
    n = P.degree(f)
    if n < 1 or n > 5:
        raise ValidationError("galois_label handles degrees 1 to 5")
    if not P.is_irreducible(f):
        raise ValidationError(f"{P.to_str(f)} is reducible")
    if n == 1:
        return "C1"
    disc = P.discriminant(f)
    square = P.is_square(disc)
    if n == 2:
        return "C2"
    if n == 3:
        return "C3" if square else "S3"
    if n == 4:
        return _quartic_label(f, disc)
    seen = set(P.factor_patterns(f, P.first_unramified_primes(disc, f[-1], sample_primes)))
    if not square and seen & {(2, 1, 1, 1), (3, 1, 1), (3, 2)}:
        return "S5"
    if square and (3, 1, 1) in seen:
        return "A5"
    return "other(5)"


def _depress_to_monic(f: Poly) -> Poly:
    """A monic integer polynomial with the same splitting field."""
    n = P.degree(f)
    lead = f[-1]
    if lead == 1:
        return f
    # lead^(n-1) f(x/lead) is monic with integer coefficients
    return tuple(c * lead ** (n - 1 - i) for i, c in enumerate(f[:-1])) + (1,)


def _square_in_quadratic(q: int, disc: int) -> bool:
    return q == 0 or P.is_square(q) or P.is_square(q * disc)


def _quartic_label(f: Poly, disc: int) -> str:
    d, c, b, a, _ = _depress_to_monic(f)
    resolvent = (-(a * a * d - 4 * b * d + c * c), a * c - 4 * d, -b, 1)
    roots = P.integer_roots(resolvent)
    distinct = sorted(set(roots))
    if len(roots) == 3:
        return "K4"
    if len(roots) == 1:
        r = roots[0]
        if _square_in_quadratic(r * r - 4 * d, disc) and _square_in_quadratic(a * a - 4 * (b - r), disc):
            return "C4"
        return "D4"
    if distinct:
        raise ValidationError("resolvent cubic has a repeated root; input is not separable")
    return "A4" if P.is_square(disc) else "S4"


# ---------------------------------------------------------------------------
# polynomial search


def _box(n: int, H: int) -> np.ndarray:
    """All monic degree-``n`` coefficient vectors (lowest first) with entries in ``[-H, H]``."""
    axes = [np.arange(-H, H + 1, dtype=np.int64)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    ones = np.ones((grid.shape[0], 1), dtype=np.int64)
    return np.concatenate([grid, ones], axis=1)


def _disc_estimate(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Floating discriminants of monic rows of ``C`` with an error allowance."""
    N, width = C.shape
    n = width - 1
    if n == 2:
        c, b = C[:, 0], C[:, 1]
        return (b * b - 4 * c).astype(float), np.zeros(N)
    if n == 3:
        d, c, b = (C[:, i].astype(float) for i in range(3))
        val = b * b * c * c - 4 * c**3 - 4 * b**3 * d - 27 * d * d + 18 * b * c * d
        return val, np.abs(val) * 1e-12 + 1.0
    size = 2 * n - 1
    deriv = C[:, 1:] * np.arange(1, n + 1)
    M = np.zeros((N, size, size))
    for i in range(n - 1):
        M[:, i, i : i + n + 1] = C[:, ::-1]
    for i in range(n):
        M[:, n - 1 + i, i : i + n] = deriv[:, ::-1]
    det = np.linalg.det(M)
    sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
    row_norms = np.sqrt((M * M).sum(axis=2))
    hadamard = np.prod(row_norms, axis=1)
    return sign * det, hadamard * 1e-12 + 1.0


def _translation_key(f: Poly) -> Poly:
    """Canonical representative under ``x -> x + k`` and ``x -> -x`` (monic ``f``)."""
    n = P.degree(f)
    a = f[n - 1]
    # x -> x + k shifts the subleading coefficient by n*k
    k = -((a + n // 2) // n) if n else 0
    cands = []
    for shift in (k, k - 1, k + 1):
        g = _shift(f, shift)
        if -n / 2 <= g[n - 1] <= n / 2:
            cands.append(g)
            flipped = tuple(c * (-1) ** (n - i) for i, c in enumerate(g))
            cands.append(flipped)
    return min(cands, key=lambda g: (max(abs(c) for c in g), g))


def _shift(f: Poly, k: int) -> Poly:
    """``f(x + k)``."""
    out: Poly = ()
    for c in reversed(f):
        out = P.add(P.mul(out, (k, 1)), (c,))
    return out


def _fingerprint(f: Poly, disc: int, count: int) -> tuple:
    return tuple(P.factor_patterns(f, P.first_unramified_primes(disc, f[-1], count)))


def enumerate_squarefree_disc_fields(
    n: int, X: int, H: int, fingerprint_primes: int = DEFAULT_FINGERPRINT
) -> list[FieldRecord]:
    """Fields with square-free discriminant up to ``X`` from monic polynomials of height ``H``.

    In degree 2 the filter is "fundamental discriminant" instead, which is
    the same condition once the even fundamental discriminants are allowed.
    Polynomials are identified when they share the discriminant and the
    factorization patterns at the first ``fingerprint_primes`` unramified
    primes. Output is ordered by ``|D|``, then by coefficient vector.
    """
    if n not in (2, 3, 4, 5):
        raise ValidationError("degree must be 2, 3, 4 or 5")
    if X < 3 or H < 1:
        raise ValidationError("need X >= 3 and H >= 1")
    C = _box(n, H)
    est, err = _disc_estimate(C)
    keep = (np.abs(est) <= X + err) & (np.abs(est) >= 1 - err)
    sf = squarefree_flags(X)
    by_disc: dict[int, dict[Poly, Poly]] = defaultdict(dict)
    for row in C[keep]:
        f = tuple(int(v) for v in row)
        disc = P.discriminant(f)
        if disc == 0 or abs(disc) > X:
            continue
        if n == 2:
            if not is_fundamental(disc):
                continue
        elif not sf[abs(disc)]:
            continue
        key = _translation_key(f)
        best = by_disc[disc].get(key)
        if best is None or (max(map(abs, f)), f) < (max(map(abs, best)), best):
            by_disc[disc][key] = f
    records: list[FieldRecord] = []
    for disc in sorted(by_disc, key=lambda d: (abs(d), d)):
        cands = sorted(by_disc[disc].values(), key=lambda g: (max(map(abs, g)), g))
        kept: list[tuple[Poly, tuple | None]] = []
        for f in cands:
            if not P.is_irreducible(f):
                continue
            if kept:
                fp = _fingerprint(f, disc, fingerprint_primes)
                for i, (g, gfp) in enumerate(kept):
                    if gfp is None:
                        gfp = _fingerprint(g, disc, fingerprint_primes)
                        kept[i] = (g, gfp)
                    if gfp == fp:
                        break
                else:
                    kept.append((f, fp))
            else:
                kept.append((f, None))
        for f, _ in kept:
            tags = ["sf-disc"] if n > 2 or _is_sqfree(disc) else ["fund-disc"]
            label = galois_label(f)
            if n == 5:
                tags.append("heuristic")
            records.append(FieldRecord(n, f, disc, P.signature(f), label, tuple(tags)))
    records.sort(key=lambda r: (r.abs_disc, r.coeffs))
    return records


def _is_sqfree(d: int) -> bool:
    return all(e == 1 for _, e in factorize(d))


# ---------------------------------------------------------------------------
# cyclic fields of prime degree


@dataclass(frozen=True)
class ConductorEntry:
    conductor: int
    omega: int
    constructed: int
    euler_coefficient: int
    ratio: float
    discriminant: int
    tame: bool


@dataclass(frozen=True)
class CyclicFamily:
    p: int
    X: int
    records: tuple[FieldRecord, ...]
    conductors: tuple[ConductorEntry, ...]

    @property
    def ratio_constant(self) -> bool:
        """Constructed count over Euler coefficient is the same for every tame conductor."""
        ratios = {e.euler_coefficient * 1.0 / e.constructed for e in self.conductors if e.tame}
        return len(ratios) <= 1


def cyclic_conductors(p: int, X: int) -> list[tuple[int, tuple[int, ...]]]:
    """Conductors ``f`` with ``f**(p-1) <= X`` of cyclic degree-``p`` fields, with their prime-power parts.

    A conductor is a square-free product of primes congruent to 1 mod ``p``,
    optionally times ``p**2``.
    """
    fmax = _integer_root(X, p - 1)
    good = [int(q) for q in primes_up_to(fmax) if q % p == 1]
    out: list[tuple[int, tuple[int, ...]]] = []

    def extend(start: int, prod: int, parts: tuple[int, ...]) -> None:
        for i in range(start, len(good)):
            q = good[i]
            if prod * q > fmax:
                break
            new = parts + (q,)
            out.append((prod * q, new))
            extend(i + 1, prod * q, new)

    extend(0, 1, ())
    wild = [(f * p * p, parts + (p * p,)) for f, parts in out + [(1, ())] if f * p * p <= fmax]
    return sorted(out + wild)


def _integer_root(X: int, k: int) -> int:
    r = int(round(X ** (1.0 / k)))
    while r**k > X:
        r -= 1
    while (r + 1) ** k <= X:
        r += 1
    return r


def _dlog_mod_p(m: int, p: int) -> np.ndarray:
    """``table[a]`` = discrete log of ``a`` mod ``m`` reduced mod ``p`` (``m`` a prime or ``p**2``)."""
    q = m if m != p * p else p
    g = primitive_root(q)
    if m == p * p and pow(g, p - 1, m) == 1:
        g += q
    order = m - m // q
    table = np.full(m, -1, dtype=np.int64)
    x = 1
    for k in range(order):
        table[x] = k % p
        x = x * g % m
    return table


def _fold(v: np.ndarray, f: int) -> np.ndarray:
    out = np.zeros(f, dtype=v.dtype)
    for start in range(0, len(v), f):
        chunk = v[start : start + f]
        out[: len(chunk)] += chunk
    return out


def _exact_root_check(g: Poly, period: np.ndarray, f: int) -> bool:
    """Whether ``g(eta) = 0`` where ``eta = sum_a period[a] zeta_f^a``, computed in ``Z[x]/(Phi_f)``."""
    # the L1 norm of every intermediate is at most sum|g| * |eta|_1^deg
    bound = sum(abs(c) for c in g) * int(np.abs(period).sum()) ** (len(g) - 1)
    dtype = np.int64 if bound < 2**62 else object
    eta = period.astype(dtype)
    acc = np.zeros(f, dtype=dtype)
    acc[0] = g[-1]
    for c in reversed(g[:-1]):
        acc = _fold(np.convolve(acc, eta), f)
        acc[0] += c
    cyc = P.cyclotomic(f)
    rem = [int(v) for v in acc]
    dc = len(cyc) - 1
    while len(rem) - 1 >= dc:
        top = rem[-1]
        if top:
            shift = len(rem) - 1 - dc
            for j, v in enumerate(cyc):
                rem[shift + j] -= top * v
        rem.pop()
    return not any(rem)


def _fields_of_conductor(p: int, f: int, parts: tuple[int, ...]) -> list[Poly]:
    tables = [_dlog_mod_p(m, p) for m in parts]
    units = np.array([a for a in range(1, f) if math.gcd(a, f) == 1], dtype=np.int64)
    logs = np.stack([tables[i][units % m] for i, m in enumerate(parts)], axis=0)
    angles = np.exp(2j * np.pi * units / f)
    polys = []
    for tail in itertools.product(range(1, p), repeat=len(parts) - 1):
        coef = np.array((1,) + tail, dtype=np.int64)
        chi = (coef[:, None] * logs).sum(axis=0) % p
        periods = [angles[chi == j].sum() for j in range(p)]
        approx = np.real(np.poly(periods))
        g = tuple(int(round(c)) for c in approx[::-1])
        if np.max(np.abs(approx[::-1] - np.array(g))) > 1e-6:
            raise ConstructionError(f"periods for conductor {f} do not round to integers")
        indicator = np.zeros(f, dtype=np.int64)
        indicator[units[chi == 0]] = 1
        if not _exact_root_check(g, indicator, f):
            raise ConstructionError(f"period polynomial for conductor {f} failed exact verification")
        polys.append(g)
    return polys


def cyclic_fields(p: int, X: int) -> CyclicFamily:
    """All cyclic fields of odd prime degree ``p`` with discriminant at most ``X``.

    Each conductor ``f`` contributes one field per order-``p`` character that
    is nontrivial on every prime-power factor, up to Galois conjugacy of the
    character. The Euler-product coefficient ``(p-1)**omega(f)`` counts the
    characters themselves, so the reported ratio is ``p - 1`` throughout.
    """
    if p not in (3, 5, 7):
        raise ValidationError("cyclic construction supports p in {3, 5, 7}")
    if X < 1:
        raise ValidationError("X must be positive")
    records: list[FieldRecord] = []
    entries: list[ConductorEntry] = []
    for f, parts in cyclic_conductors(p, X):
        polys = _fields_of_conductor(p, f, parts)
        disc = f ** (p - 1)
        tame = f % p != 0
        for g in polys:
            pd = P.discriminant(g)
            if pd % disc or not P.is_square(pd // disc):
                raise ConstructionError(f"discriminant of {P.to_str(g)} is not {disc} times a square")
            records.append(
                FieldRecord(p, g, disc, (p, 0), f"C{p}", (f"cyclic-{p}", f"conductor={f}"))
            )
        omega = len(parts)
        euler = (p - 1) ** omega
        entries.append(ConductorEntry(f, omega, len(polys), euler, euler / len(polys), disc, tame))
    records.sort(key=lambda r: (r.abs_disc, r.coeffs))
    return CyclicFamily(p, X, tuple(records), tuple(entries))


# ---------------------------------------------------------------------------
# census


@dataclass(frozen=True)
class CensusReport:
    grid: tuple[float, ...]
    counts: tuple[int, ...]
    exponent: float
    intercept: float
    residual: float
    histogram: dict[int, int]
    max_multiplicity: int
    distinct_discriminants: int
    height_limited: bool
    tame_histogram: dict[int, int] | None = field(default=None)


def tame_part(D: int, omega: Iterable[int]) -> int:
    """``|D|`` with every prime of ``omega`` removed."""
    out = abs(D)
    for q in omega:
        while out % q == 0:
            out //= q
    return out


def _histogram(keys: Iterable[int]) -> dict[int, int]:
    mult = Counter(keys)
    return dict(sorted(Counter(mult.values()).items()))


def family_census(
    records: Sequence[FieldRecord],
    X_grid: Sequence[float],
    omega: Iterable[int] | None = None,
    height_limited: bool | None = None,
) -> CensusReport:
    """Counts on a grid, a log-log growth fit, and discriminant multiplicities.

    ``height_limited`` defaults to whether the records came from polynomial
    search; fits over such data are lower-bound empirics.
    """
    grid = tuple(sorted(float(x) for x in X_grid))
    discs = np.sort(np.array([r.abs_disc for r in records], dtype=np.float64))
    counts = tuple(int(np.searchsorted(discs, x, side="right")) for x in grid)
    pts = [(math.log(x), math.log(c)) for x, c in zip(grid, counts) if c > 0]
    if len(pts) < 3:
        raise FitError("need at least 3 grid points with nonzero counts")
    xs, ys = np.array(pts).T
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    hist = _histogram(r.abs_disc for r in records)
    tame_hist = None
    if omega is not None:
        om = tuple(omega)
        tame_hist = _histogram(tame_part(r.disc, om) for r in records)
    if height_limited is None:
        height_limited = any("sf-disc" in r.tags or "fund-disc" in r.tags for r in records)
    return CensusReport(
        grid=grid,
        counts=counts,
        exponent=float(slope),
        intercept=float(intercept),
        residual=residual,
        histogram=hist,
        max_multiplicity=max(hist) if hist else 0,
        distinct_discriminants=sum(hist.values()),
        height_limited=height_limited,
        tame_histogram=tame_hist,
    )


def geometric_grid(lo: float, hi: float, k: int) -> list[float]:
    """``k`` points spaced geometrically from ``lo`` to ``hi`` inclusive."""
    if k < 2 or lo <= 0 or hi <= lo:
        raise ValidationError("geometric grid needs k >= 2 and 0 < lo < hi")
    return [float(v) for v in np.geomspace(lo, hi, k)]
