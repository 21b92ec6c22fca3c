"""Dense univariate polynomials with integer coefficients.

A polynomial is a tuple of ints, lowest degree first: ``(c0, c1, ..., cn)``
stands for ``c0 + c1*x + ... + cn*x**n``. The zero polynomial is ``()``.
Helpers suffixed ``_mod`` work over the field with ``p`` elements on lists of
residues in the same layout.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .primes import is_prime, next_prime

Poly = tuple[int, ...]


def trim(coeffs) -> Poly:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(int(v) for v in c)


def degree(f: Poly) -> int:
    return len(f) - 1


def leading(f: Poly) -> int:
    return f[-1] if f else 0


def evaluate(f: Poly, x):
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def derivative(f: Poly) -> Poly:
    return trim(i * f[i] for i in range(1, len(f)))


def add(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    return trim((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n))


def neg(f: Poly) -> Poly:
    return tuple(-c for c in f)


def sub(f: Poly, g: Poly) -> Poly:
    return add(f, neg(g))


def mul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim(out)


def exact_div(f: Poly, g: Poly) -> Poly:
    """Quotient ``f / g`` for monic-or-dividing ``g``; raises if the division is not exact."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(f)
    q = [0] * max(len(f) - len(g) + 1, 0)
    lg = g[-1]
    for k in range(len(f) - len(g), -1, -1):
        c = r[k + len(g) - 1]
        if c % lg:
            raise ValidationError("inexact polynomial division")
        c //= lg
        q[k] = c
        if c:
            for j, b in enumerate(g):
                r[k + j] -= c * b
    if any(r):
        raise ValidationError("inexact polynomial division")
    return trim(q)


def content(f: Poly) -> int:
    g = 0
    for c in f:
        g = math.gcd(g, c)
    return g


def primitive_part(f: Poly) -> Poly:
    """Divide out the content and make the leading coefficient positive."""
    c = content(f)
    if c == 0:
        return ()
    if f[-1] < 0:
        c = -c
    return tuple(v // c for v in f)


def to_str(f: Poly, var: str = "x") -> str:
    """Render as ``x^3 - x - 1``; the CLI parser reads this format back."""
    if not f:
        return "0"
    parts: list[str] = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if i == 0:
            body = str(a)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if a == 1 else f"{a}*{mono}"
        parts.append(f"{sign} {body}")
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


# ---------------------------------------------------------------------------
# resultants and discriminants


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def resultant(f: Poly, g: Poly) -> int:
    """Resultant via the Sylvester determinant (fraction-free elimination)."""
    m, n = degree(f), degree(g)
    if m < 0 or n < 0:
        return 0
    if m == 0:
        return f[0] ** n
    if n == 0:
        return g[0] ** m
    size = m + n
    rows: list[list[int]] = []
    fh = list(reversed(f))
    gh = list(reversed(g))
    for i in range(n):
        rows.append([0] * i + fh + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gh + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(f: Poly) -> int:
    """Discriminant with the usual sign convention ``(-1)^(n(n-1)/2) Res(f, f') / lc(f)``."""
    n = degree(f)
    if n < 1:
        raise ValidationError("discriminant needs degree >= 1")
    if n == 1:
        return 1
    if n == 2:
        c, b, a = f
        return b * b - 4 * a * c
    if n == 3:
        d, c, b, a = f
        return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d
    r = resultant(f, derivative(f))
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * r // f[-1]


# ---------------------------------------------------------------------------
# arithmetic over the field with p elements


def reduce_mod(f, p: int) -> list[int]:
    out = [c % p for c in f]
    while out and out[-1] == 0:
        out.pop()
    return out


def _trim_mod(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def mul_mod(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim_mod([v % p for v in out])


def rem_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo ``m`` (``m`` nonzero, any leading coefficient)."""
    a = list(a)
    dm = len(m) - 1
    inv = pow(m[-1], p - 2, p) if m[-1] != 1 else 1
    while len(a) - 1 >= dm and a:
        c = a[-1] * inv % p
        shift = len(a) - 1 - dm
        if c:
            for j in range(dm + 1):
                a[shift + j] = (a[shift + j] - c * m[j]) % p
        a.pop()
        _trim_mod(a)
    return a


def gcd_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = list(a), list(b)
    while b:
        a, b = b, rem_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [c * inv % p for c in a]
    return a


def divexact_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], p - 2, p)
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] * inv % p
        q[k] = c
        if c:
            for j in range(db + 1):
                a[k + j] = (a[k + j] - c * b[j]) % p
    return _trim_mod(q)


def powmod_x(e: int, m: list[int], p: int) -> list[int]:
    """``x**e`` reduced modulo ``m`` over the field with ``p`` elements."""
    result = [1]
    base = rem_mod([0, 1], m, p)
    while e:
        if e & 1:
            result = rem_mod(mul_mod(result, base, p), m, p)
        e >>= 1
        if e:
            base = rem_mod(mul_mod(base, base, p), m, p)
    return result


def compose_mod(g: list[int], h: list[int], m: list[int], p: int) -> list[int]:
    """``g(h) mod m`` by Horner's rule."""
    acc: list[int] = []
    for c in reversed(g):
        acc = rem_mod(mul_mod(acc, h, p), m, p)
        if c:
            acc = list(acc) + [0] * max(0, 1 - len(acc))
            acc[0] = (acc[0] + c) % p
            _trim_mod(acc)
    return acc


def factor_degrees_mod(f: Poly, p: int, frob: list[int] | None = None) -> tuple[int, ...]:
    """Multiset of irreducible factor degrees of a square-free ``f`` mod ``p``.

    Distinct-degree factorization: the product of the degree-``d`` factors is
    ``gcd(x^(p^d) - x, g)`` once lower degrees are divided out of ``g``.
    ``frob`` may carry a precomputed ``x^p mod f`` (residues mod ``p``).
    Returned in descending order. The caller guarantees ``f`` stays
    square-free mod ``p``.
    """
    g = reduce_mod(f, p)
    if len(g) != len(f):
        raise ValidationError(f"leading coefficient vanishes mod {p}")
    if g[-1] != 1:
        inv = pow(g[-1], p - 2, p)
        g = [c * inv % p for c in g]
    if len(g) <= 2:
        return (1,) if len(g) == 2 else ()
    out: list[int] = []
    if frob is None:
        frob = powmod_x(p, g, p)
    else:
        frob = _trim_mod([c % p for c in frob])
    h = frob
    d = 1
    while len(g) - 1 >= 2 * d:
        if d > 1:
            h = compose_mod(h, frob, g, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        fac = gcd_mod(g, _trim_mod(diff), p)
        k = len(fac) - 1
        if k > 0:
            out.extend([d] * (k // d))
            g = divexact_mod(g, fac, p)
            if len(g) > 1:
                frob = rem_mod(frob, g, p)
                h = rem_mod(h, g, p)
        d += 1
    if len(g) - 1 > 0:
        out.append(len(g) - 1)
    return tuple(sorted(out, reverse=True))


def x_pow_p_batch(f: Poly, primes: np.ndarray) -> np.ndarray:
    """``x^p mod f`` over the field with ``p`` elements, for many primes at once.

    Returns an int64 array of shape ``(len(primes), deg f)``; row ``i`` holds
    the residues (lowest degree first) for ``primes[i]``. Every prime must be
    below ``2**31`` and must not divide the leading coefficient.
    """
    n = degree(f)
    P = np.asarray(primes, dtype=np.int64)
    N = P.size
    if n < 1 or N == 0:
        return np.zeros((N, max(n, 0)), dtype=np.int64)
    coeffs = np.stack([_mod_batch(c, P) for c in f], axis=1)
    lead = coeffs[:, n]
    inv = _pow_batch(lead, P - 2, P)
    # monic reduction polynomial: x^n = -sum(m_j x^j)
    m = coeffs[:, :n] * inv[:, None] % P[:, None]

    def mulmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = np.zeros((N, 2 * n - 1), dtype=np.int64)
        for i in range(n):
            ai = a[:, i]
            for j in range(n):
                prod[:, i + j] = (prod[:, i + j] + ai * b[:, j]) % P
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[:, k]
            for j in range(n):
                prod[:, k - n + j] = (prod[:, k - n + j] - c * m[:, j]) % P
        return prod[:, :n]

    result = np.zeros((N, n), dtype=np.int64)
    result[:, 0] = 1
    base = np.zeros((N, n), dtype=np.int64)
    if n == 1:
        base[:, 0] = (-m[:, 0]) % P
    else:
        base[:, 1] = 1
    e = P.copy()
    while np.any(e):
        bit = (e & 1).astype(bool)
        if bit.any():
            prod = mulmod(result, base)
            result = np.where(bit[:, None], prod, result)
        e >>= 1
        if np.any(e):
            base = mulmod(base, base)
    return result


def factor_patterns(f: Poly, primes) -> list[tuple[int, ...]]:
    """Factor-degree multisets of ``f`` modulo each prime, sharing one batched ``x^p`` pass."""
    P = np.asarray(primes, dtype=np.int64)
    if P.size == 0:
        return []
    frobs = x_pow_p_batch(f, P)
    return [factor_degrees_mod(f, int(p), frobs[i].tolist()) for i, p in enumerate(P)]


def _mod_batch(c: int, P: np.ndarray) -> np.ndarray:
    if abs(c) < 2**62:
        return np.mod(np.int64(c), P)
    return np.array([c % int(p) for p in P], dtype=np.int64)


def _pow_batch(a: np.ndarray, e: np.ndarray, m: np.ndarray) -> np.ndarray:
    a = np.mod(a, m)
    e = e.copy()
    out = np.ones_like(a)
    while np.any(e):
        bit = (e & 1).astype(bool)
        out = np.where(bit, out * a % m, out)
        e >>= 1
        a = a * a % m
    return out


# ---------------------------------------------------------------------------
# irreducibility over the rationals


def _subset_sums(parts: tuple[int, ...]) -> set[int]:
    sums = {0}
    for d in parts:
        sums |= {s + d for s in sums}
    return sums


def is_irreducible(f: Poly, max_primes: int = 60) -> bool:
    """Irreducibility over the rationals.

    Each unramified prime restricts the degrees a rational factor could have
    to subset sums of the mod-``p`` factor degrees. When only ``{0, n}``
    survive the polynomial is irreducible. Undecided cases (rare, e.g. when
    every Frobenius class is reducible) are settled exactly up to degree 5
    by searching for linear and quadratic factors; above degree 5 they raise.
    """
    f = trim(f)
    n = degree(f)
    if n <= 0:
        return False
    if n == 1:
        return True
    if content(f) != 1 and n >= 1:
        f = primitive_part(f)
    disc = discriminant(f)
    if disc == 0:
        return False
    lead = f[-1]
    possible = set(range(1, n))
    p = 1
    tried = 0
    while tried < max_primes and possible:
        p = next_prime(p)
        if lead % p == 0 or disc % p == 0:
            continue
        tried += 1
        possible &= _subset_sums(factor_degrees_mod(f, p))
    if not possible:
        return True
    if lead != 1 and n <= 5:
        # lead^(n-1) f(x/lead) is monic and factors exactly when f does
        return is_irreducible([c * lead ** (n - 1 - i) for i, c in enumerate(f[:-1])] + [1], max_primes)
    if n <= 5:
        if 1 in possible or n - 1 in possible:
            if has_rational_root(f):
                return False
        if 2 in possible or n - 2 in possible:
            return _monic_quadratic_factor(f) is None
        return True
    raise ValidationError(f"irreducibility of the degree-{n} polynomial {to_str(f)} is undecided")


def _monic_quadratic_factor(f: Poly) -> Poly | None:
    """A monic integer quadratic dividing the monic ``f``, if one exists.

    Roots obey the Cauchy bound ``|r| < B``, so a factor ``x^2 + u x + v``
    has ``|u| < 2B`` and ``v`` dividing the constant term.
    """
    bound = 1 + max(abs(c) for c in f[:-1])
    const = f[0]
    vs = [0] if const == 0 else [s * d for d in _divisors(const) if d < bound * bound for s in (1, -1)]
    for v in vs:
        for u in range(-2 * bound, 2 * bound + 1):
            g = (v, u, 1)
            if _divides(g, f):
                return g
    return None


def _divides(g: Poly, f: Poly) -> bool:
    r = list(f)
    dg = len(g) - 1
    while len(r) - 1 >= dg:
        c = r[-1]
        shift = len(r) - 1 - dg
        for j, v in enumerate(g):
            r[shift + j] -= c * v
        r.pop()
    return not any(r)


def integer_roots(f: Poly) -> list[int]:
    """Integer roots of a monic ``f`` with multiplicity, ascending."""
    f = trim(f)
    if not f or f[-1] != 1:
        raise ValidationError("integer_roots needs a monic polynomial")
    roots: list[int] = []
    while len(f) > 1 and f[0] == 0:
        roots.append(0)
        f = f[1:]
    changed = True
    while changed and len(f) > 1:
        changed = False
        for d in _divisors(f[0]):
            for r in (d, -d):
                if evaluate(f, r) == 0:
                    roots.append(r)
                    f = exact_div(f, (-r, 1))
                    changed = True
                    break
            if changed:
                break
    return sorted(roots)


def has_rational_root(f: Poly) -> bool:
    """True when ``f`` has a root in the rationals (rational root theorem)."""
    f = trim(f)
    if not f:
        return True
    if f[0] == 0:
        return True
    lead, const = abs(f[-1]), abs(f[0])
    nums = _divisors(const)
    dens = _divisors(lead)
    for q in dens:
        for pnum in nums:
            if math.gcd(pnum, q) != 1:
                continue
            for s in (pnum, -pnum):
                # q^n f(s/q), exact
                n = len(f) - 1
                if sum(c * s**i * q ** (n - i) for i, c in enumerate(f)) == 0:
                    return True
    return False


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


# ---------------------------------------------------------------------------
# cyclotomic polynomials, real roots


@lru_cache(maxsize=2048)
def cyclotomic(n: int) -> Poly:
    """The ``n``-th cyclotomic polynomial, by exact division of ``x^n - 1``."""
    if n < 1:
        raise ValidationError("cyclotomic index must be positive")
    f: Poly = (-1,) + (0,) * (n - 1) + (1,)
    for d in range(1, n):
        if n % d == 0:
            f = exact_div(f, cyclotomic(d))
    return f


def real_root_count(f: Poly) -> int:
    """Number of distinct real roots, by a Sturm sequence in exact rationals."""
    f = trim(f)
    if degree(f) < 1:
        return 0
    seq = [tuple(Fraction(c) for c in f), tuple(Fraction(c) for c in derivative(f))]
    while True:
        a, b = seq[-2], seq[-1]
        r = _rem_q(a, b)
        if not r:
            break
        seq.append(tuple(-c for c in r))

    def sign_changes(signs: list[int]) -> int:
        s = [v for v in signs if v != 0]
        return sum(1 for u, v in zip(s, s[1:]) if u != v)

    at_pos = [(1 if q[-1] > 0 else -1) for q in seq]
    at_neg = [(1 if (q[-1] > 0) == ((len(q) - 1) % 2 == 0) else -1) for q in seq]
    return sign_changes(at_neg) - sign_changes(at_pos)


def _rem_q(a: tuple, b: tuple) -> tuple:
    a = list(a)
    while len(a) >= len(b) and a:
        c = a[-1] / b[-1]
        shift = len(a) - len(b)
        for j, v in enumerate(b):
            a[shift + j] -= c * v
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return tuple(a)


def signature(f: Poly) -> tuple[int, int]:
    """``(r1, r2)`` for an irreducible ``f``."""
    r1 = real_root_count(f)
    return r1, (degree(f) - r1) // 2


def first_unramified_primes(disc: int, lead: int, count: int, start: int = 1) -> list[int]:
    out: list[int] = []
    p = start
    while len(out) < count:
        p = next_prime(p)
        if disc % p and lead % p:
            out.append(p)
    return out


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


__all__ = [
    "Poly",
    "trim",
    "degree",
    "evaluate",
    "derivative",
    "mul",
    "add",
    "sub",
    "exact_div",
    "content",
    "primitive_part",
    "to_str",
    "resultant",
    "discriminant",
    "factor_degrees_mod",
    "is_irreducible",
    "has_rational_root",
    "cyclotomic",
    "real_root_count",
    "signature",
    "first_unramified_primes",
    "is_square",
    "is_prime",
]
