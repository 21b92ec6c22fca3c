"""Explicit constants for the family Chebotarev estimates.

Covers the zero-free box width ``delta`` attached to a field family, the
Kowalski-Michel exponent budget, the lower thresholds on ``x`` and on the
Galois-closure discriminant ``D_L``, closed-form error bounds, and an audit
that samples ``(D_L, x)`` above the thresholds and checks every error term
against its allowance.

Identities between rational parameters are computed with ``Fraction``.
Thresholds grow like towers of exponentials, so they are carried as natural
logarithms in ``mpmath`` floats and never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from scipy import optimize

from .errors import InfeasibleError, ValidationError

Number = int | float | Fraction

C_Q_DEFAULT = 1 / 57.54
AUDIT_DPS = 40
AUDIT_RTOL = 1e-12


def as_fraction(v: Number) -> Fraction:
    """Exact value of ``v``; floats go through their shortest decimal form so 0.1 is 1/10."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValidationError(f"non-finite parameter {v}")
        return Fraction(repr(v))
    return Fraction(v)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class FamilyConfig:
    """Parameters of one field family together with the absolute-constant placeholders.

    ``m`` is the largest irreducible-representation dimension of the group,
    ``d`` the counting exponent (the family has at most ``X^d`` members below
    ``X``), ``tau`` the multiplicity exponent and ``beta`` the proven lower
    counting exponent. ``A`` is the power of ``log x`` saved in the error.
    The constants ``C0, C1, C2, C5, C6, c_Q, c_k`` are effective but never
    evaluated in the literature; the defaults are placeholders.
    """

    name: str
    n: int
    group_order: int
    m: int
    d: Fraction
    tau: Fraction
    beta: Fraction
    eps0: Fraction = Fraction(1, 10)
    A: int = 2
    n_k: int = 1
    D_k: int = 1
    c_Q: float = C_Q_DEFAULT
    c_k: float | None = None
    C0: float = 1.0
    C1: float = 1.0
    C2: float = 1.0
    C5: float = 1.0
    C6: float = 1.0

    def __post_init__(self) -> None:
        for attr in ("d", "tau", "beta", "eps0"):
            object.__setattr__(self, attr, as_fraction(getattr(self, attr)))
        if self.n < 2 or self.group_order < 2 or self.m < 1:
            raise ValidationError("degree and group order must be at least 2, m at least 1")
        if self.A < 2:
            raise ValidationError("A must be at least 2")
        if self.tau < 0 or self.tau >= self.d:
            raise ValidationError(f"need 0 <= tau < d, got tau={self.tau}, d={self.d}")
        if not 0 < self.eps0 <= min(Fraction(1, 2), self.d / 4):
            raise ValidationError(f"need 0 < eps0 <= min(1/2, d/4) = {min(Fraction(1, 2), self.d / 4)}")
        if self.n_k < 1 or self.D_k < 1:
            raise ValidationError("base field degree and discriminant must be positive")
        consts = (self.c_Q, self.C0, self.C1, self.C2, self.C5, self.C6)
        if any(c <= 0 for c in consts) or (self.c_k is not None and self.c_k <= 0):
            raise ValidationError("absolute constants must be positive")

    @property
    def base_is_rational(self) -> bool:
        return self.n_k == 1 and self.D_k == 1

    @property
    def n_L(self) -> int:
        return self.n_k * self.group_order

    @property
    def base_constant(self) -> float:
        """``c_k``, falling back to ``c_Q`` over the rationals."""
        if self.c_k is not None:
            return self.c_k
        return self.c_Q

    def with_(self, **changes) -> "FamilyConfig":
        return replace(self, **changes)

    def constants_echo(self) -> dict[str, float]:
        return {
            "c_Q": self.c_Q,
            "c_k": self.base_constant,
            "C0": self.C0,
            "C1": self.C1,
            "C2": self.C2,
            "C5": self.C5,
            "C6": self.C6,
        }


PRESETS: dict[str, dict] = {
    "s3": dict(n=3, group_order=6, m=2, d=Fraction(1), tau=Fraction(1, 3), beta=Fraction(1)),
    "s4": dict(n=4, group_order=24, m=3, d=Fraction(1), tau=Fraction(1, 2), beta=Fraction(1)),
    "c3": dict(n=3, group_order=3, m=1, d=Fraction(1, 2), tau=Fraction(0), beta=Fraction(1, 2)),
    "d5": dict(n=5, group_order=10, m=2, d=Fraction(7, 10), tau=Fraction(1, 4), beta=Fraction(1, 2)),
    "a4": dict(n=4, group_order=12, m=3, d=Fraction(5, 6), tau=Fraction(2784, 10000), beta=Fraction(1, 2)),
}


def preset(name: str, **overrides) -> FamilyConfig:
    key = name.lower()
    if key not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return FamilyConfig(name=key, **{**PRESETS[key], **overrides})


# ---------------------------------------------------------------------------
# delta and the Kowalski-Michel budget


def delta_of(eps0: Number, m: int, group_order: int, d: Number) -> Fraction:
    """Width of the zero-free box: ``eps0 / (5 m |G| / 2 + 2 d + 4 eps0)``."""
    e, dd = as_fraction(eps0), as_fraction(d)
    if e <= 0 or m <= 0 or group_order <= 0 or dd <= 0:
        raise ValidationError("delta needs positive inputs")
    return e / (Fraction(5 * m * group_order, 2) + 2 * dd + 4 * e)


@dataclass(frozen=True)
class KMBudget:
    """Exponent bookkeeping for the zero-density count over a family."""

    c0_base: Fraction
    c0: Fraction
    Delta: Fraction
    eta: Fraction
    alpha: Fraction
    delta: Fraction
    gap: Fraction
    exceptional_exponent: Fraction
    exceptional_exponent_exact: Fraction

    def as_dict(self) -> dict[str, Fraction]:
        return {
            "c0_base": self.c0_base,
            "c0": self.c0,
            "Delta": self.Delta,
            "eta": self.eta,
            "alpha": self.alpha,
            "delta": self.delta,
            "gap": self.gap,
            "exceptional_exponent": self.exceptional_exponent,
            "exceptional_exponent_exact": self.exceptional_exponent_exact,
        }


def km_budget(m: int, A: Number, d: Number, tau: Number, eps0: Number, eta: Number | None = None) -> KMBudget:
    """Budget with conductor exponent ``A`` (``|G|/2`` for the family setting).

    ``gap`` is ``(1 - Delta) d - tau`` and ``exceptional_exponent`` is the
    stated allowance ``tau + eps0``; ``exceptional_exponent_exact`` is
    ``(1 - (1 - eta) Delta) d``, which never exceeds it.
    """
    A_, d_, t_, e_ = (as_fraction(v) for v in (A, d, tau, eps0))
    if t_ >= d_:
        raise InfeasibleError(f"tau = {t_} is not below d = {d_}; no exponent budget remains")
    if e_ <= 0 or m <= 0 or A_ <= 0:
        raise ValidationError("m, A and eps0 must be positive")
    eta_ = e_ / (2 * d_) if eta is None else as_fraction(eta)
    if not 0 < eta_ < Fraction(1, 4):
        raise ValidationError(f"eta must lie in (0, 1/4), got {eta_}")
    c0_base = Fraction(5 * m) * A_ / 2 + d_
    c0 = c0_base + e_
    Delta = 1 - t_ / d_ - e_ / (2 * d_)
    gap = (1 - Delta) * d_ - t_
    if c0 < 2 * gap:
        raise InfeasibleError("c0 is below twice the exponent gap")
    alpha = (c0 + gap) / (c0 + 2 * gap)
    if alpha < Fraction(3, 4):
        raise InfeasibleError(f"alpha = {alpha} is below 3/4")
    exact = (1 - (1 - eta_) * Delta) * d_
    return KMBudget(c0_base, c0, Delta, eta_, alpha, 1 - alpha, gap, t_ + e_, exact)


# ---------------------------------------------------------------------------
# parameters of the x-threshold


def c0_choice(A: int) -> Fraction:
    return Fraction(1, 2 ** (A + 3) + 8)


def c1_choice(cfg: FamilyConfig) -> float:
    """Allowance constant for the sum over zeros."""
    return float(c0_choice(cfg.A)) / (6 * cfg.C5 * cfg.C6)


def c1_prime_choice(cfg: FamilyConfig) -> float:
    """Allowance constant for the truncation terms."""
    return float(c0_choice(cfg.A)) / (12 * cfg.C5)


def _mpf(v) -> mpmath.mpf:
    return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)


@dataclass(frozen=True)
class ChebParams:
    """Parameters of the x-threshold ``x0(D_L)``, stored as ``log nu1``, ``nu2``, ``nu3``."""

    config: FamilyConfig
    delta: Fraction
    delta0: Fraction
    c0: Fraction
    log_nu1: mpmath.mpf
    nu2: mpmath.mpf
    nu3: mpmath.mpf
    T0: mpmath.mpf

    @property
    def nu1(self) -> mpmath.mpf:
        return mpmath.exp(self.log_nu1)

    def log_x0(self, log_D: mpmath.mpf) -> mpmath.mpf:
        """``log x0`` for ``log D_L = log_D``.

        Over the rationals the iterated-log form with exponents 5/3 and 1/3
        is used; over a general base field the squared form.
        """
        with mpmath.workdps(AUDIT_DPS):
            log_D = mpmath.mpf(log_D)
            inner = mpmath.log(self.nu3 * log_D)
            if inner <= 0:
                raise ValidationError("D_L too small for the threshold formula")
            if self.config.base_is_rational:
                tail = mpmath.log(mpmath.log(2 * log_D))
                if tail <= 0:
                    raise ValidationError("D_L too small for the threshold formula")
                return self.log_nu1 + self.nu2 * inner ** (mpmath.mpf(5) / 3) * tail ** (mpmath.mpf(1) / 3)
            return self.log_nu1 + self.nu2 * inner**2

    def x0_table(self, log_Ds) -> list[tuple[mpmath.mpf, mpmath.mpf]]:
        return [(mpmath.mpf(v), self.log_x0(v)) for v in log_Ds]


def cheb_params(cfg: FamilyConfig, delta: Number | None = None, delta0: Number | None = None) -> ChebParams:
    """Threshold parameters for ``cfg`` with box width ``delta`` (default from the family)."""
    dl = delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d) if delta is None else as_fraction(delta)
    d0 = dl if delta0 is None else as_fraction(delta0)
    if dl <= 0 or d0 <= 0:
        raise ValidationError("delta and delta0 must be positive")
    if d0 > dl:
        raise ValidationError("delta0 may not exceed delta")
    if cfg.base_is_rational and d0 != dl:
        raise ValidationError("over the rationals delta0 equals delta")
    A = cfg.A
    if dl > Fraction(1, 2 * A):
        raise ValidationError(f"delta = {dl} exceeds 1/(2A) = {Fraction(1, 2 * A)}")
    c0 = c0_choice(A)
    with mpmath.workdps(AUDIT_DPS):
        c0m, dlm, d0m = _mpf(c0), _mpf(dl), _mpf(d0)
        G, nL, nk = cfg.group_order, cfg.n_L, cfg.n_k
        ck = mpmath.mpf(cfg.base_constant)
        c1_small = c0m / (12 * cfg.C5 * cfg.C6)
        c1p = c0m / (12 * cfg.C5)
        inner = 6 / c1_small * G * mpmath.mpf(10) ** (A - 1) * mpmath.mpf(nL) ** A
        log_nu1 = -mpmath.log(c0m) + (mpmath.log(inner) - 2 * mpmath.log(dlm)) / d0m
        nu2 = max(2 * A / d0m, 4 * A / ck * nk**3 / dlm) + 2 * A
        nu3 = (
            6
            * c1p ** (-mpmath.mpf(1) / (2 * A + 1))
            * c1_small ** (-mpmath.mpf(1) / (2 * A))
            * cfg.D_k
            * nL
            * dlm ** (-mpmath.mpf(1) / A)
        )
        T0 = mpmath.mpf(cfg.D_k) ** (-mpmath.mpf(1) / nk) * mpmath.exp(ck / (d0m * nk**3)) - 3
    return ChebParams(cfg, dl, d0, c0, log_nu1, nu2, nu3, T0)


# ---------------------------------------------------------------------------
# discriminant thresholds


@dataclass(frozen=True)
class Threshold:
    """A lower bound on ``D_L`` held as ``log D_L``."""

    name: str
    log_value: mpmath.mpf

    @property
    def log10(self) -> mpmath.mpf:
        with mpmath.workdps(AUDIT_DPS):
            return self.log_value / mpmath.log(10)

    @property
    def loglog(self) -> mpmath.mpf:
        with mpmath.workdps(AUDIT_DPS):
            return mpmath.log(self.log_value) if self.log_value > 0 else mpmath.ninf


@dataclass(frozen=True)
class Thresholds:
    D0_prime: Threshold
    D1: Threshold
    D1_prime: Threshold
    D2: Threshold
    D2_parts: tuple[Threshold, ...]

    def all(self) -> tuple[Threshold, ...]:
        return (self.D0_prime, self.D1, self.D1_prime, self.D2)

    @property
    def log_max(self) -> mpmath.mpf:
        return max(t.log_value for t in self.all())


def _d1_prime_log(cfg: FamilyConfig) -> mpmath.mpf:
    """Smallest ``log D`` past which ``D >= c2 (log D)^k`` holds for good.

    The constant uses the worst class size 1. Writing ``u = log D`` the
    condition is ``g(u) = u - log c2 - k log u >= 0``; ``g`` is convex with its
    minimum at ``u = k``, so the threshold is its larger root when that
    minimum is negative.
    """
    A, nL = cfg.A, cfg.n_L
    c1 = 1.0 / (cfg.group_order * cfg.C1)
    k = 2 * A / (cfg.C2 * math.sqrt(10))
    log_c2 = k * (-math.log(c1) / (2 * A) + 0.5 * math.log(10 * nL))

    def g(u: float) -> float:
        return u - log_c2 - k * math.log(u)

    if g(k) >= 0:
        return mpmath.mpf(0)
    hi = max(2 * k, 1.0)
    while g(hi) < 0:
        hi *= 2
    return mpmath.mpf(optimize.brentq(g, k, hi, xtol=1e-14, rtol=1e-15))


def thresholds(cfg: FamilyConfig, delta: Number | None = None, delta0: Number | None = None) -> Thresholds:
    """Lower bounds on ``D_L``: zero-free overlap, exceptional-zero exclusion,
    the large-``x`` regime and the truncation terms.

    Raises ``InfeasibleError`` when ``delta >= 2/(2A+1)``, where the truncation
    thresholds have no solution.
    """
    dl = delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d) if delta is None else as_fraction(delta)
    d0 = dl if delta0 is None else as_fraction(delta0)
    A = cfg.A
    if dl >= Fraction(2, 2 * A + 1):
        raise InfeasibleError(f"delta = {dl} is not below 2/(2A+1) = {Fraction(2, 2 * A + 1)}")
    if dl >= Fraction(1, A + 1):
        raise InfeasibleError(f"delta = {dl} is not below 1/(A+1) = {Fraction(1, A + 1)}")
    with mpmath.workdps(AUDIT_DPS):
        dlm, d0m = _mpf(dl), _mpf(d0)
        if cfg.base_is_rational:
            D0p = mpmath.exp(2 / dlm * mpmath.exp(mpmath.mpf(cfg.c_Q) / dlm))
        else:
            D0p = mpmath.exp(mpmath.mpf(cfg.base_constant))
        D1 = max(mpmath.log(4), 1 / (4 * d0m))
        D1p = _d1_prime_log(cfg)
        G, nL = cfg.group_order, cfg.n_L
        c1p = mpmath.mpf(c1_prime_choice(cfg))
        ten = mpmath.mpf(10)
        e1 = 2 / dlm - 2 * A - 1
        e2 = 2 / dlm - 2 * (A + 1)
        parts = (
            Threshold("E1a", (G / c1p * (10 * nL) ** A) ** (1 / e1)),
            Threshold("E1b", (2 / dlm * ten**A * mpmath.mpf(nL) ** (A + 1) / c1p * G) ** (1 / e1)),
            Threshold("E2b", (ten ** (A + 1) * mpmath.mpf(nL) ** (A + 2) / c1p * G) ** (1 / e2)),
        )
        D2 = max(parts, key=lambda t: t.log_value)
    return Thresholds(
        Threshold("D0'", D0p),
        Threshold("D1", D1),
        Threshold("D1'", D1p),
        Threshold("D2", D2.log_value),
        parts,
    )


# ---------------------------------------------------------------------------
# closed-form bounds


def _li(x: float) -> float:
    from .frobenius import li

    return li(x)


def _bound_conditional_error(*, x, D_L, n_L, class_size=1, group_order=1, C0=1.0):
    return C0 * class_size / group_order * math.sqrt(x) * (math.log(D_L) + n_L * math.log(x))


def _bound_unconditional_error(*, x, n_L, class_size=1, group_order=1, C1=1.0, C2=1.0, beta0=None):
    main = C1 * x * math.exp(-C2 * n_L**-0.5 * math.sqrt(math.log(x)))
    if beta0 is None:
        return main
    if not 0 < beta0 < 1:
        raise ValidationError("beta0 must lie in (0, 1)")
    xb = x**beta0
    return class_size / group_order * (_li(xb) if xb > 2 else 0.0) + main


def _bound_torsion(*, D, n, ell, eps=0.0):
    return D ** (0.5 - 1 / (2 * ell * (n - 1)) + eps)


def _bound_split_primes(*, D, M, eps=0.0):
    return D ** (0.5 + eps) / M


def _bound_silverman(*, D, n):
    return n ** (-1 / (2 * (n - 1))) * D ** (1 / (2 * n * (n - 1)))


def _bound_ruppert_weak(*, D, n, B2=2.0):
    return B2 * D ** (1 / (2 * n))


_BOUNDS: dict[str, Callable[..., float]] = {
    "conditional_error": _bound_conditional_error,
    "unconditional_error": _bound_unconditional_error,
    "torsion_bound": _bound_torsion,
    "split_primes": _bound_split_primes,
    "silverman": _bound_silverman,
    "ruppert_weak": _bound_ruppert_weak,
}

BOUND_KINDS = tuple(_BOUNDS)


def bound_eval(kind: str, **args) -> float:
    """Evaluate a named closed-form bound.

    ``conditional_error``: conditional error ``C0 |C|/|G| sqrt(x) log(D_L x^n_L)``.
    ``unconditional_error``: unconditional error with an optional exceptional zero ``beta0``.
    ``torsion_bound``: torsion bound ``D^(1/2 - 1/(2 ell (n-1)) + eps)``.
    ``split_primes``: torsion bound ``D^(1/2+eps) / M`` from ``M`` small split primes.
    ``silverman``: height floor ``n^(-1/(2(n-1))) D^(1/(2n(n-1)))``.
    ``ruppert_weak``: height ceiling ``B2 D^(1/(2n))``.
    """
    try:
        fn = _BOUNDS[kind]
    except KeyError:
        raise ValidationError(f"unknown bound kind {kind!r}; choose from {list(_BOUNDS)}") from None
    for key in ("x", "D", "D_L", "M", "n", "n_L", "ell", "group_order", "class_size"):
        if key in args and not args[key] > 0:
            raise ValidationError(f"{key} must be positive")
    if kind in ("torsion_bound", "silverman", "ruppert_weak") and args.get("n", 2) < 2:
        raise ValidationError("degree must be at least 2")
    if "x" in args and args["x"] <= 1:
        raise ValidationError("x must exceed 1")
    try:
        return float(fn(**args))
    except TypeError as exc:
        raise ValidationError(f"bad arguments for {kind}: {exc}") from None


# ---------------------------------------------------------------------------
# envelope audit

TERM_NAMES = ("E1a", "E1b", "E1c", "E1d", "E2a", "E2b", "E3", "E4", "E5")
X_CONDITIONS = ("x1", "x2", "x3", "SxT_E3a", "SxT_E4")


@dataclass(frozen=True)
class TermCheck:
    name: str
    log_term: mpmath.mpf
    log_target: mpmath.mpf

    @property
    def slack(self) -> mpmath.mpf:
        return self.log_target - self.log_term

    @property
    def ok(self) -> bool:
        return self.log_term <= self.log_target + AUDIT_RTOL * max(1, abs(self.log_target))


def _zero_free_width(cfg: FamilyConfig, log_T: mpmath.mpf) -> mpmath.mpf:
    """Width of the classical zero-free region at height ``T = exp(log_T)``."""
    T = mpmath.exp(log_T)
    if cfg.base_is_rational:
        return mpmath.mpf(cfg.c_Q) / (mpmath.log(T + 2) ** (mpmath.mpf(2) / 3) * mpmath.log(mpmath.log(T + 3)) ** (mpmath.mpf(1) / 3))
    nk = cfg.n_k
    return mpmath.mpf(cfg.base_constant) / (nk**2 * (mpmath.log(cfg.D_k) + nk * mpmath.log(T + 3)))


def term_checks(cfg: FamilyConfig, delta: Number, delta0: Number, log_D, log_x) -> list[TermCheck]:
    """Compare every error term with its allowance at ``(D_L, x)``, all in log space.

    The allowance is ``c x / (|G| (log x)^(A-1))`` with ``c = c1`` for the sums
    over zeros and ``c = c1'`` for the truncation terms.
    """
    with mpmath.workdps(AUDIT_DPS):
        dl, d0 = _mpf(as_fraction(delta)), _mpf(as_fraction(delta0))
        L, lD = mpmath.mpf(log_x), mpmath.mpf(log_D)
        A, G, nL = cfg.A, cfg.group_order, cfg.n_L
        logL, llD, lnL = mpmath.log(L), mpmath.log(lD), mpmath.log(nL)
        log_T = 2 / dl * llD
        log_DT = mpmath.log(lD + nL * log_T)
        base = L - (A - 1) * logL - mpmath.log(G)
        tgt1 = mpmath.log(c1_choice(cfg)) + base
        tgt1p = mpmath.log(c1_prime_choice(cfg)) + base
        width = _zero_free_width(cfg, log_T)
        terms = {
            "E1a": (L - log_T + logL + llD, tgt1p),
            "E1b": (llD, tgt1p),
            "E1c": (lnL + logL, tgt1p),
            "E1d": (lnL + L - log_T + logL + mpmath.log(log_T), tgt1p),
            "E2a": (logL + llD, tgt1p),
            "E2b": (lnL + L - log_T + 2 * logL, tgt1p),
            "E3": (L / 2 + lnL + 2 * llD, tgt1),
            "E4": ((1 - d0) * L + mpmath.log(log_T) + log_DT, tgt1),
            "E5": ((1 - width) * L + mpmath.log(log_T) + log_DT, tgt1),
        }
        return [TermCheck(name, t, g) for name, (t, g) in terms.items()]


def x_conditions(cfg: FamilyConfig, delta: Number, delta0: Number, log_D) -> dict[str, mpmath.mpf]:
    """Closed-form lower bounds on ``log x`` that make the terms fit their allowances."""
    with mpmath.workdps(AUDIT_DPS):
        dl, d0 = _mpf(as_fraction(delta)), _mpf(as_fraction(delta0))
        lD = mpmath.log(mpmath.mpf(log_D))
        A, G, nL = cfg.A, cfg.group_order, mpmath.mpf(cfg.n_L)
        ln10 = mpmath.log(10)
        lc1, lc1p = mpmath.log(c1_choice(cfg)), mpmath.log(c1_prime_choice(cfg))
        lG = mpmath.log(G)
        c4 = mpmath.log(6) - lc1 + lG + (A - 1) * ln10 + A * mpmath.log(nL)
        return {
            "x1": -lc1p + lG + (A - 1) * mpmath.log(10 * nL) + (2 * A - 1) * lD,
            "x2": -lc1p + lG + A * ln10 + (A + 1) * mpmath.log(nL) + 2 * A * lD,
            "x3": -lc1p + lG + A * ln10 + A * mpmath.log(nL) + (2 * A + 1) * lD,
            "SxT_E3a": -2 * lc1 + 2 * lG + 2 * (A - 1) * ln10 + 2 * A * mpmath.log(nL) + 4 * A * lD,
            "SxT_E4": (c4 - 2 * mpmath.log(dl) + 2 * A * lD) / d0,
        }


@dataclass(frozen=True)
class AuditSample:
    log_D: mpmath.mpf
    log_x: mpmath.mpf
    failed_terms: tuple[str, ...]
    failed_conditions: tuple[str, ...]


@dataclass(frozen=True)
class AuditReport:
    config_name: str
    delta: Fraction
    status: str
    n_samples: int
    samples: tuple[AuditSample, ...] = field(repr=False)
    term_failures: dict[str, int] = field(default_factory=dict)
    condition_failures: dict[str, int] = field(default_factory=dict)
    min_slack: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def envelope_audit(
    cfg: FamilyConfig,
    delta: Number | None = None,
    delta0: Number | None = None,
    n_samples: int = 1000,
    seed: int = 0,
    spread: float = 4.0,
) -> AuditReport:
    """Sample ``(D_L, x)`` above every threshold and check each error term.

    ``log log D_L`` is drawn from ``[t, t + spread]`` past the largest
    discriminant threshold ``t``; ``log log x`` is drawn uniformly between
    ``log log x0(D_L)`` and ``log(10 n_L (log D_L)^2)``. Both endpoints of
    the ``x`` range are always included. A failing term means the closed
    forms do not imply the estimates they are meant to.
    """
    dl = delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d) if delta is None else as_fraction(delta)
    d0 = dl if delta0 is None else as_fraction(delta0)
    if n_samples < 1:
        raise ValidationError("need at least one sample")
    params = cheb_params(cfg, dl, d0)
    th = thresholds(cfg, dl, d0)
    rng = np.random.default_rng(seed)
    u = rng.random((n_samples, 2))
    samples = []
    term_fail: dict[str, int] = {}
    cond_fail: dict[str, int] = {}
    slack: dict[str, mpmath.mpf] = {}
    feasible = 0
    with mpmath.workdps(AUDIT_DPS):
        base = mpmath.log(max(th.log_max, mpmath.e))
        for i in range(n_samples):
            lD = mpmath.exp(base + spread * mpmath.mpf(float(u[i, 0])))
            lo = params.log_x0(lD)
            hi = 10 * cfg.n_L * lD**2
            if lo > hi:
                continue
            feasible += 1
            if i == 0:
                lx = lo
            elif i == 1:
                lx = hi
            else:
                llo, lhi = mpmath.log(lo), mpmath.log(hi)
                lx = mpmath.exp(llo + (lhi - llo) * mpmath.mpf(float(u[i, 1])))
            checks = term_checks(cfg, dl, d0, lD, lx)
            bad_t = tuple(c.name for c in checks if not c.ok)
            conds = x_conditions(cfg, dl, d0, lD)
            bad_c = tuple(k for k, v in conds.items() if lx < v)
            for c in checks:
                rel = c.slack / max(1, abs(c.log_target))
                if c.name not in slack or rel < slack[c.name]:
                    slack[c.name] = rel
            for k in bad_t:
                term_fail[k] = term_fail.get(k, 0) + 1
            for k in bad_c:
                cond_fail[k] = cond_fail.get(k, 0) + 1
            samples.append(AuditSample(lD, lx, bad_t, bad_c))
    if feasible == 0:
        status = "skipped"
    elif term_fail or cond_fail:
        status = "fail"
    else:
        status = "pass"
    return AuditReport(
        cfg.name,
        dl,
        status,
        feasible,
        tuple(samples),
        term_fail,
        cond_fail,
        {k: float(v) for k, v in slack.items()},
    )


def binding_conditions(cfg: FamilyConfig, delta: Number, delta0: Number, log_D, log_x) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Names of the x-conditions and of the error terms that fail at ``(D_L, x)``."""
    conds = x_conditions(cfg, delta, delta0, log_D)
    with mpmath.workdps(AUDIT_DPS):
        lx = mpmath.mpf(log_x)
        bad_c = tuple(k for k, v in conds.items() if lx < v)
    bad_t = tuple(c.name for c in term_checks(cfg, delta, delta0, log_D, log_x) if not c.ok)
    return bad_c, bad_t


# ---------------------------------------------------------------------------
# full report


@dataclass(frozen=True)
class ConstantsReport:
    config: FamilyConfig
    delta: Fraction
    delta0: Fraction
    budget: KMBudget
    params: ChebParams
    thresholds: Thresholds | None
    threshold_error: str | None
    x0_table: tuple[tuple[mpmath.mpf, mpmath.mpf], ...]
    audit: AuditReport | None

    def rows(self) -> list[tuple[str, str]]:
        """Flat ``(key, value)`` pairs in a fixed order, values in plain decimal."""

        def fmt(v) -> str:
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
            if isinstance(v, mpmath.mpf):
                return mpmath.nstr(v, 15, min_fixed=-5, max_fixed=16)
            if isinstance(v, float):
                return repr(v)
            return str(v)

        cfg = self.config
        out = [
            ("preset", cfg.name),
            ("n", fmt(cfg.n)),
            ("group_order", fmt(cfg.group_order)),
            ("m", fmt(cfg.m)),
            ("d", fmt(cfg.d)),
            ("tau", fmt(cfg.tau)),
            ("beta", fmt(cfg.beta)),
            ("eps0", fmt(cfg.eps0)),
            ("A", fmt(cfg.A)),
            ("n_k", fmt(cfg.n_k)),
            ("D_k", fmt(cfg.D_k)),
        ]
        out += [(f"const.{k}", fmt(v)) for k, v in cfg.constants_echo().items()]
        out += [("delta", fmt(self.delta)), ("delta.float", fmt(float(self.delta))), ("delta0", fmt(self.delta0))]
        out += [(f"budget.{k}", fmt(v)) for k, v in self.budget.as_dict().items()]
        p = self.params
        out += [
            ("c0_choice", fmt(p.c0)),
            ("log_nu1", fmt(p.log_nu1)),
            ("nu2", fmt(p.nu2)),
            ("nu3", fmt(p.nu3)),
            ("T0", fmt(p.T0)),
        ]
        if self.thresholds is not None:
            for t in self.thresholds.all() + self.thresholds.D2_parts:
                out.append((f"log10_{t.name}", fmt(t.log10)))
        else:
            out.append(("thresholds", f"infeasible: {self.threshold_error}"))
        for lD, lx in self.x0_table:
            out.append((f"log_x0[log_D={fmt(lD)}]", fmt(lx)))
        if self.audit is not None:
            a = self.audit
            out += [("audit.status", a.status), ("audit.samples", str(a.n_samples))]
            out += [(f"audit.fail.{k}", str(v)) for k, v in sorted({**a.term_failures, **a.condition_failures}.items())]
        return out

    def to_csv(self) -> str:
        lines = ["key,value"]
        for k, v in self.rows():
            lines.append(f"{k},{v}" if "," not in k + v else f'"{k}","{v}"')
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        rows = self.rows()
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows) + "\n"


def constants_report(
    cfg: FamilyConfig,
    delta: Number | None = None,
    delta0: Number | None = None,
    audit_samples: int = 0,
    seed: int = 0,
    log10_D_values: tuple[float, ...] = (),
) -> ConstantsReport:
    """Everything the pipeline computes for one family, in one record."""
    dl = delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d) if delta is None else as_fraction(delta)
    d0 = dl if delta0 is None else as_fraction(delta0)
    budget = km_budget(cfg.m, Fraction(cfg.group_order, 2), cfg.d, cfg.tau, cfg.eps0)
    params = cheb_params(cfg, dl, d0)
    try:
        th, err = thresholds(cfg, dl, d0), None
    except InfeasibleError as exc:
        th, err = None, str(exc)
    with mpmath.workdps(AUDIT_DPS):
        table = []
        for v in log10_D_values:
            lD = mpmath.mpf(v) * mpmath.log(10)
            table.append((lD, params.log_x0(lD)))
    audit = envelope_audit(cfg, dl, d0, audit_samples, seed) if audit_samples and th is not None else None
    return ConstantsReport(cfg, dl, d0, budget, params, th, err, tuple(table), audit)
