"""Absolute Weil heights of algebraic numbers and small field generators.

The height of an algebraic number of degree ``n`` with primitive minimal
polynomial ``g`` is ``M(g)^(1/n)``, where the Mahler measure ``M(g)`` is the
absolute leading coefficient times the product of ``max(1, |root|)``.

Roots come from a simultaneous (Aberth-Ehrlich) iteration, which refines all
roots together without deflation, and every root is certified by a relative
residual test before use.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import poly as P
from .errors import ConstructionError, ValidationError
from .fields import FieldRecord
from .primes import fundamental_discriminant, is_squarefree

Poly = list[int]

RESIDUAL_TOL = 1e-10
HEIGHT_RTOL = 1e-8
SILVERMAN_RTOL = 1e-9
CHUNK = 200_000


# ---------------------------------------------------------------------------
# roots


def aberth_roots(coeffs: Sequence[complex], max_iter: int = 500) -> np.ndarray:
    """All complex roots of a polynomial given lowest coefficient first.

    Starting points lie on a circle of radius from the Fujiwara bound,
    rotated off the real axis so conjugate pairs do not start symmetric.
    Raises ``ConstructionError`` if the residual certificate fails.
    """
    a = np.array([complex(c) for c in coeffs], dtype=complex)
    while len(a) > 1 and a[-1] == 0:
        a = a[:-1]
    n = len(a) - 1
    if n < 1:
        raise ValidationError("constant polynomial has no roots")
    zeros = 0
    while a[zeros] == 0:
        zeros += 1
    if zeros:
        # roots at the origin are exact; iterate only on the rest
        rest = aberth_roots(a[zeros:], max_iter) if n > zeros else np.zeros(0, dtype=complex)
        return np.concatenate([np.zeros(zeros, dtype=complex), rest])
    monic = a / a[-1]
    if n == 1:
        return np.array([-monic[0]])
    radius = 2 * max(abs(monic[n - k]) ** (1 / k) for k in range(1, n + 1))
    radius = max(radius, 1e-3)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    hi_first = monic[::-1]
    dcoef = np.polyder(hi_first)
    eye = np.eye(n, dtype=bool)
    for _ in range(max_iter):
        pz = np.polyval(hi_first, z)
        dz = np.polyval(dcoef, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dz
            diff = z[:, None] - z[None, :]
            diff[eye] = 1
            inv = 1 / diff
            inv[eye] = 0
            step = ratio / (1 - ratio * inv.sum(axis=1))
        step[~np.isfinite(step)] = 0
        z = z - step
        if np.all(np.abs(step) <= 1e-16 * np.maximum(1, np.abs(z))):
            break
    # a few Newton polishing steps on each root separately
    for _ in range(2):
        dz = np.polyval(dcoef, z)
        good = dz != 0
        z[good] -= np.polyval(hi_first, z[good]) / dz[good]
    _certify(monic, z)
    return z


def _certify(monic: np.ndarray, z: np.ndarray) -> None:
    absz = np.abs(z)
    scale = np.zeros_like(absz)
    for k, c in enumerate(monic):
        scale += abs(c) * absz**k
    resid = np.abs(np.polyval(monic[::-1], z))
    if np.any(resid > RESIDUAL_TOL * scale):
        raise ConstructionError(f"root residual {resid.max():.3g} exceeds the certificate tolerance")


# ---------------------------------------------------------------------------
# heights


def _normalize(f: Sequence[int]) -> Poly:
    g = P.primitive_part(P.trim(list(f)))
    if P.leading(g) < 0:
        g = P.neg(g)
    return g


def mahler_measure(f: Sequence[int]) -> float:
    g = P.trim(list(f))
    if P.degree(g) < 1:
        raise ValidationError("Mahler measure needs a nonconstant polynomial")
    roots = aberth_roots(g)
    return abs(P.leading(g)) * float(np.prod(np.maximum(1.0, np.abs(roots))))


def weil_height(min_poly: Sequence[int]) -> float:
    """Absolute multiplicative height of any root of an irreducible integer polynomial."""
    g = _normalize(min_poly)
    n = P.degree(g)
    if n < 1:
        raise ValidationError("a minimal polynomial has degree at least 1")
    if n > 1 and not P.is_irreducible(g):
        raise ValidationError(f"{P.to_str(g)} is reducible")
    return max(1.0, mahler_measure(g) ** (1 / n))


# ---------------------------------------------------------------------------
# exact minimal polynomials


def _rem_monic(a: Poly, f: Poly) -> Poly:
    r = list(a)
    n = P.degree(f)
    for k in range(len(r) - 1, n - 1, -1):
        c = r[k]
        if c:
            for i in range(n + 1):
                r[k - n + i] -= c * f[i]
    return P.trim(r[:n]) if len(r) > n else P.trim(r)


def _mult_matrix(f: Poly, alpha: Sequence[int]) -> list[list[int]]:
    """Matrix of multiplication by ``alpha(theta)`` on the power basis of ``Z[theta]``, ``f`` monic."""
    n = P.degree(f)
    cols = []
    cur = P.trim(list(alpha))
    for _ in range(n):
        r = _rem_monic(cur, f)
        cols.append(list(r) + [0] * (n - len(r)))
        cur = P.mul(cur, [0, 1])
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def berkowitz_charpoly(M: Sequence[Sequence[int]]) -> Poly:
    """Characteristic polynomial ``det(xI - M)`` without division, lowest coefficient first."""
    n = len(M)
    poly = [1]
    for k in range(n):
        t = [1, -M[k][k]]
        v = [M[i][k] for i in range(k)]
        row = M[k][:k]
        for _ in range(k):
            t.append(-sum(r * x for r, x in zip(row, v)))
            v = [sum(M[i][j] * v[j] for j in range(k)) for i in range(k)]
        poly = [sum(t[i - j] * poly[j] for j in range(len(poly)) if 0 <= i - j < len(t)) for i in range(k + 2)]
    return poly[::-1]


def monic_model(f: Sequence[int]) -> Poly:
    """``a^(n-1) f(x/a)`` for leading coefficient ``a``: monic, with root ``a * theta``."""
    f = P.trim(list(f))
    n, a = P.degree(f), P.leading(f)
    return [c * a ** (n - 1 - i) for i, c in enumerate(f[:-1])] + [1]


def minimal_polynomial(f: Sequence[int], alpha: Sequence[int]) -> tuple[Poly, bool]:
    """Characteristic polynomial of ``alpha(theta)`` over Q and whether it is squarefree.

    For a root ``theta`` of the monic irreducible ``f`` of degree ``n``, the
    characteristic polynomial is the minimal polynomial raised to
    ``[K : Q(alpha)]``; it is squarefree exactly when ``alpha`` generates ``K``.
    """
    f = P.trim(list(f))
    if P.leading(f) != 1:
        raise ValidationError("minimal_polynomial expects a monic defining polynomial")
    char = berkowitz_charpoly(_mult_matrix(f, alpha))
    generates = P.discriminant(char) != 0
    return _normalize(char), generates


# ---------------------------------------------------------------------------
# small generators


@dataclass(frozen=True)
class SmallGenerator:
    """Outcome of the generator search in one field.

    ``alpha`` holds the coordinates of the best generator on the power basis
    of a root of ``model`` (the monic defining polynomial searched).
    """

    disc: int
    degree: int
    model: tuple[int, ...]
    search_height: int
    status: str
    alpha: tuple[int, ...] | None
    min_poly: tuple[int, ...] | None
    height: float | None
    bound: float
    ruppert_weak_ok: bool
    silverman_floor: float
    silverman_ok: bool
    silverman_boundary: bool
    candidates: int
    generators: int
    min_silverman_ratio: float | None

    def csv_row(self) -> tuple[str, ...]:
        alpha = ";".join(str(a) for a in self.alpha) if self.alpha is not None else ""
        h = f"{self.height:.10f}" if self.height is not None else ""
        return (str(self.disc), alpha, h, f"{self.bound:.10f}", "1" if self.ruppert_weak_ok else "0")


def ruppert_weak_bound(D: int, n: int) -> float:
    return 2.0 * abs(D) ** (1 / (2 * n))


def silverman_floor(D: int, n: int) -> float:
    return n ** (-1 / (2 * (n - 1))) * abs(D) ** (1 / (2 * n * (n - 1)))


def ruppert_weak_ok(H: float, D: int, n: int) -> bool:
    return H <= ruppert_weak_bound(D, n) * (1 + HEIGHT_RTOL)


def _field_disc(f: Poly, disc: int | None) -> int:
    if disc is not None:
        return disc
    d = P.discriminant(f)
    if P.degree(f) == 2:
        return fundamental_discriminant(d)
    if is_squarefree(abs(d)):
        return d
    raise ValidationError("polynomial discriminant is not squarefree; pass the field discriminant")


def _candidates(n: int, h: int, start: int, stop: int) -> np.ndarray:
    idx = np.unravel_index(np.arange(start, stop, dtype=np.int64), (2 * h + 1,) * n)
    return np.stack(idx, axis=1).astype(np.int64) - h


def small_generator(field: FieldRecord | Sequence[int], search_height: int = 10, disc: int | None = None) -> SmallGenerator:
    """Smallest-height generator ``sum a_i theta^i`` with every ``|a_i| <= search_height``.

    Heights of all candidates are evaluated from the conjugates of ``theta``;
    the winner (lexicographically least coefficient vector among ties) is
    then recomputed exactly through its characteristic polynomial. The
    Silverman floor is checked against every generator evaluated.
    """
    if isinstance(field, FieldRecord):
        f, disc = list(field.coeffs), field.disc if disc is None else disc
    else:
        f = P.trim(list(field))
    n = P.degree(f)
    if n < 2:
        raise ValidationError("small_generator needs a field of degree at least 2")
    if n > 5:
        raise ValidationError("small_generator supports degree at most 5")
    if search_height < 0:
        raise ValidationError("search height must be nonnegative")
    if not P.is_irreducible(f):
        raise ValidationError(f"{P.to_str(f)} is reducible")
    D = _field_disc(f, disc)
    g = monic_model(f)
    theta = aberth_roots(g)
    powers = np.vander(theta, n, increasing=True)  # conjugate j, power i
    floor = silverman_floor(D, n)
    bound = ruppert_weak_bound(D, n)
    total = (2 * search_height + 1) ** n
    best_h = math.inf
    best_idx: int | None = None
    n_gen = 0
    min_ratio = math.inf
    pairs = np.triu_indices(n, 1)
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        C = _candidates(n, search_height, start, stop)
        conj = C.astype(float) @ powers.T
        mags = np.abs(conj)
        scale = 1 + mags.max(axis=1)
        sep = np.abs(conj[:, pairs[0]] - conj[:, pairs[1]]).min(axis=1) / scale
        gen = sep > 1e-6
        unsure = np.flatnonzero((sep > 1e-11) & ~gen)
        for k in unsure:
            gen[k] = minimal_polynomial(g, C[k].tolist())[1]
        H = np.prod(np.maximum(1.0, mags), axis=1) ** (1 / n)
        Hg = H[gen]
        if Hg.size == 0:
            continue
        n_gen += int(Hg.size)
        min_ratio = min(min_ratio, float(Hg.min() / floor))
        loc = np.flatnonzero(gen)
        j = int(np.argmin(Hg))
        if Hg[j] < best_h * (1 - 1e-12):
            best_h = float(Hg[j])
            best_idx = start + int(loc[j])
    silverman_ok = n_gen == 0 or min_ratio >= 1 - SILVERMAN_RTOL
    boundary = n_gen > 0 and abs(min_ratio - 1) <= SILVERMAN_RTOL
    if best_idx is None:
        return SmallGenerator(D, n, tuple(g), search_height, "exhausted", None, None, None, bound, False, floor,
                              silverman_ok, False, total, 0, None)
    alpha = _candidates(n, search_height, best_idx, best_idx + 1)[0].tolist()
    mp, ok = minimal_polynomial(g, alpha)
    if not ok:
        raise ConstructionError(f"selected candidate {alpha} does not generate the field")
    exact_h = weil_height(mp)
    if abs(exact_h - best_h) > HEIGHT_RTOL * exact_h:
        raise ConstructionError(f"height mismatch {exact_h} vs {best_h} for {alpha}")
    weak = ruppert_weak_ok(exact_h, D, n)
    return SmallGenerator(
        D, n, tuple(g), search_height, "found" if weak else "inconclusive", tuple(alpha), tuple(mp), exact_h,
        bound, weak, floor, silverman_ok, boundary, total, n_gen, min_ratio,
    )


def smallgen_csv(results: Sequence[SmallGenerator]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("disc", "alpha_coeffs", "H", "bound", "ok"))
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()
