"""Prime generation and small-integer factorization.

The segmented sieve keeps memory proportional to the square root of the bound
plus one block, so bounds up to 10**8 stay cheap.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from functools import lru_cache

import numpy as np

from .errors import CapExceededError, ValidationError

SIEVE_CAP = 10**8
_BLOCK = 1 << 18


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def prime_blocks(lo: int, hi: int, cap: int = SIEVE_CAP) -> Iterator[np.ndarray]:
    """Yield ascending arrays of the primes in ``[lo, hi]``, one sieve block at a time."""
    if hi > cap:
        raise CapExceededError(f"sieve bound {hi} exceeds cap {cap}")
    lo = max(lo, 2)
    if hi < lo:
        return
    base = _simple_sieve(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(start + _BLOCK, hi + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, ((start + p - 1) // p) * p)
            flags[first - start :: p] = False
        block = np.flatnonzero(flags).astype(np.int64) + start
        if block.size:
            yield block
        start = stop


def primes_up_to(n: int, cap: int = SIEVE_CAP) -> np.ndarray:
    """All primes ``p <= n`` as an int64 array."""
    blocks = list(prime_blocks(2, n, cap))
    if not blocks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(blocks)


def prime_pi(n: int, cap: int = SIEVE_CAP) -> int:
    """Number of primes ``<= n``."""
    return sum(int(b.size) for b in prime_blocks(2, n, cap))


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for ``n < 3.3 * 10**24``."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    m = max(n + 1, 2)
    while not is_prime(m):
        m += 1
    return m


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``|n|`` as ``((p, e), ...)`` by trial division."""
    n = abs(n)
    if n == 0:
        raise ValidationError("cannot factor 0")
    out: list[tuple[int, int]] = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def distinct_prime_count(n: int) -> int:
    return len(factorize(n))


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for _, e in factorize(n))


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def primitive_root(p: int) -> int:
    """Least primitive root modulo an odd prime, or modulo 2."""
    if p == 2:
        return 1
    qs = [q for q, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise ValidationError(f"{p} has no primitive root")


def squarefree_part(n: int) -> int:
    """Signed square-free kernel: ``n = squarefree_part(n) * m**2``."""
    if n == 0:
        raise ValidationError("0 has no square-free part")
    out = -1 if n < 0 else 1
    for p, e in factorize(n):
        if e % 2:
            out *= p
    return out


def fundamental_discriminant(n: int) -> int:
    """Discriminant of the quadratic field generated by the square root of a non-square ``n``."""
    d = squarefree_part(n)
    if d == 1:
        raise ValidationError(f"{n} is a square")
    return d if d % 4 == 1 else 4 * d


def is_fundamental(d: int) -> bool:
    """True for discriminants of quadratic fields (1 excluded)."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def squarefree_flags(limit: int) -> np.ndarray:
    """Boolean array ``flags[k]`` telling whether ``k`` is square-free, for ``0 <= k <= limit``."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[0] = False
    for p in _simple_sieve(math.isqrt(limit)):
        p = int(p)
        flags[p * p :: p * p] = False
    return flags
