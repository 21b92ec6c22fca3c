import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from chebfam import constants as K
from chebfam.errors import InfeasibleError, ValidationError

PRESET_NAMES = sorted(K.PRESETS)


@st.composite
def configs(draw):
    group_order = draw(st.integers(min_value=2, max_value=120))
    m = draw(st.integers(min_value=1, max_value=6))
    d = Fraction(draw(st.integers(min_value=1, max_value=24)), draw(st.integers(min_value=1, max_value=12)))
    tau = d * Fraction(draw(st.integers(min_value=0, max_value=99)), 100)
    cap = min(Fraction(1, 2), d / 4)
    eps0 = cap * Fraction(draw(st.integers(min_value=1, max_value=100)), 100)
    return K.FamilyConfig("random", 3, group_order, m, d, tau, d / 2, eps0)


# --- delta and the budget --------------------------------------------------------


def test_delta_s3_example():
    assert K.delta_of(Fraction(1, 10), 2, 6, 1) == Fraction(1, 324)


@settings(max_examples=100, deadline=None)
@given(configs())
def test_delta_equals_one_minus_alpha(cfg):
    delta = K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)
    budget = K.km_budget(cfg.m, Fraction(cfg.group_order, 2), cfg.d, cfg.tau, cfg.eps0)
    assert delta == 1 - budget.alpha
    assert budget.delta == delta


@settings(max_examples=100, deadline=None)
@given(configs())
def test_delta_oracle(cfg):
    e, d = sympy.Rational(cfg.eps0.numerator, cfg.eps0.denominator), sympy.Rational(cfg.d.numerator, cfg.d.denominator)
    expected = e / (sympy.Rational(5, 2) * cfg.m * cfg.group_order + 2 * d + 4 * e)
    got = K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)
    assert sympy.Rational(got.numerator, got.denominator) == expected


@settings(max_examples=100, deadline=None)
@given(configs())
def test_budget_invariants(cfg):
    b = K.km_budget(cfg.m, Fraction(cfg.group_order, 2), cfg.d, cfg.tau, cfg.eps0)
    assert b.gap == cfg.eps0 / 2
    assert b.alpha >= Fraction(3, 4)
    assert b.exceptional_exponent_exact <= b.exceptional_exponent == cfg.tau + cfg.eps0


@settings(max_examples=60, deadline=None)
@given(configs(), st.integers(min_value=1, max_value=50))
def test_delta_shrinks_with_eps0_and_group(cfg, k):
    small = cfg.eps0 * Fraction(1, k + 1)
    assert K.delta_of(small, cfg.m, cfg.group_order, cfg.d) < K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)
    assert K.delta_of(cfg.eps0, cfg.m, 2 * cfg.group_order, cfg.d) < K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)


def test_s3_budget_example():
    b = K.km_budget(2, 3, 1, Fraction(1, 3), Fraction(1, 10))
    assert b.c0_base == 16
    assert b.gap == Fraction(1, 20)
    assert b.exceptional_exponent == Fraction(13, 30)


def test_budget_infeasible_when_tau_reaches_d():
    with pytest.raises(InfeasibleError):
        K.km_budget(2, 3, 1, 1, Fraction(1, 10))


@pytest.mark.parametrize("eta", [0, Fraction(1, 4), -1])
def test_budget_rejects_eta(eta):
    with pytest.raises(ValidationError):
        K.km_budget(2, 3, 1, Fraction(1, 3), Fraction(1, 10), eta=eta)


# --- configurations --------------------------------------------------------------


@pytest.mark.parametrize(
    "overrides",
    [dict(tau=Fraction(1)), dict(eps0=Fraction(1)), dict(A=1), dict(C5=0.0), dict(group_order=1), dict(eps0=0)],
)
def test_config_validation(overrides):
    with pytest.raises(ValidationError):
        K.preset("s3", **overrides)


def test_unknown_preset():
    with pytest.raises(ValidationError):
        K.preset("q8")


@pytest.mark.parametrize("v,expected", [(0.1, Fraction(1, 10)), ("2/7", Fraction(2, 7)), (3, Fraction(3))])
def test_as_fraction(v, expected):
    assert K.as_fraction(v) == expected


def test_as_fraction_rejects_nan():
    with pytest.raises(ValidationError):
        K.as_fraction(float("nan"))


# --- threshold parameters ---------------------------------------------------------


def test_c0_choice():
    assert K.c0_choice(2) == Fraction(1, 40)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_nu2_formula(name):
    cfg = K.preset(name)
    p = K.cheb_params(cfg)
    d = mpmath.mpf(p.delta.numerator) / p.delta.denominator
    expected = max(2 * cfg.A / d, 4 * cfg.A / mpmath.mpf(cfg.c_Q) / d) + 2 * cfg.A
    assert mpmath.almosteq(p.nu2, expected, rel_eps=mpmath.mpf(10) ** -14)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PRESET_NAMES), st.floats(min_value=0.05, max_value=0.95))
def test_nu2_decreasing_in_delta(name, frac):
    cfg = K.preset(name)
    hi = Fraction(1, 2 * cfg.A)
    lo = hi * K.as_fraction(frac)
    assert K.cheb_params(cfg, lo).nu2 > K.cheb_params(cfg, hi).nu2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PRESET_NAMES), st.floats(min_value=3, max_value=1e4), st.floats(min_value=1.01, max_value=100))
def test_x0_nondecreasing_in_discriminant(name, log_d, factor):
    p = K.cheb_params(K.preset(name))
    assert p.log_x0(log_d * factor) >= p.log_x0(log_d)


def test_cheb_params_rejects_bad_delta():
    cfg = K.preset("s3")
    with pytest.raises(ValidationError):
        K.cheb_params(cfg, Fraction(1, 3))
    with pytest.raises(ValidationError):
        K.cheb_params(cfg, Fraction(1, 100), Fraction(1, 200))


def test_general_base_field_allows_smaller_delta0():
    cfg = K.preset("s3", n_k=2, D_k=5, c_k=0.01)
    p = K.cheb_params(cfg, Fraction(1, 100), Fraction(1, 200))
    assert p.delta0 == Fraction(1, 200)
    assert p.log_x0(100) > p.log_nu1


# --- thresholds ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PRESET_NAMES), st.floats(min_value=0.05, max_value=0.95))
def test_thresholds_monotone_in_delta(name, frac):
    cfg = K.preset(name)
    big = Fraction(1, 8)
    small = big * K.as_fraction(frac)
    a, b = K.thresholds(cfg, small), K.thresholds(cfg, big)
    assert a.D0_prime.log_value >= b.D0_prime.log_value
    assert a.D1.log_value >= b.D1.log_value
    assert a.D1_prime.log_value == b.D1_prime.log_value
    # the truncation threshold shrinks with delta: its root exponent 1/(2/delta - 2A - 1) does
    assert a.D2.log_value <= b.D2.log_value
    assert a.log_max >= b.log_max


def test_thresholds_infeasible():
    with pytest.raises(InfeasibleError):
        K.thresholds(K.preset("s3"), Fraction(2, 5))


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_d1_prime_is_a_root(name):
    cfg = K.preset(name)
    u = float(K.thresholds(cfg).D1_prime.log_value)
    k = 2 * cfg.A / (cfg.C2 * math.sqrt(10))
    log_c2 = k * (math.log(cfg.group_order * cfg.C1) / (2 * cfg.A) + 0.5 * math.log(10 * cfg.n_L))
    g = lambda v: v - log_c2 - k * math.log(v)  # noqa: E731
    assert u > k
    assert abs(g(u)) < 1e-9
    assert g(u * 1.01) > 0


def test_threshold_log10():
    t = K.Threshold("x", mpmath.log(1000))
    assert mpmath.almosteq(t.log10, 3)


# --- bounds -------------------------------------------------------------------


def test_torsion_bound_example():
    # quadratic fields, 3-torsion: exponent 1/2 - 1/6 = 1/3
    assert K.bound_eval("torsion_bound", D=10**6, n=2, ell=3) == pytest.approx(100.0, rel=1e-12)
    assert K.bound_eval("torsion_bound", D=10**6, n=3, ell=3) == pytest.approx(10**2.5, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=2, max_value=1e12), st.integers(min_value=2, max_value=8), st.integers(min_value=2, max_value=7))
def test_torsion_bound_oracle(D, n, ell):
    expected = mpmath.power(D, mpmath.mpf(1) / 2 - mpmath.mpf(1) / (2 * ell * (n - 1)))
    assert K.bound_eval("torsion_bound", D=D, n=n, ell=ell) == pytest.approx(float(expected), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=2, max_value=1e12), st.integers(min_value=2, max_value=8))
def test_height_bounds_oracle(D, n):
    floor = mpmath.power(n, -mpmath.mpf(1) / (2 * (n - 1))) * mpmath.power(D, mpmath.mpf(1) / (2 * n * (n - 1)))
    assert K.bound_eval("silverman", D=D, n=n) == pytest.approx(float(floor), rel=1e-12)
    assert K.bound_eval("ruppert_weak", D=D, n=n) == pytest.approx(2 * float(mpmath.power(D, mpmath.mpf(1) / (2 * n))), rel=1e-12)
    assert K.bound_eval("silverman", D=D, n=n) <= K.bound_eval("ruppert_weak", D=D, n=n)


def test_silverman_example():
    assert K.bound_eval("silverman", D=5, n=2) == pytest.approx(5**0.25 / math.sqrt(2), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=10, max_value=1e8), st.floats(min_value=10, max_value=1e9), st.integers(min_value=2, max_value=30))
def test_conditional_error_oracle(x, D, n):
    expected = mpmath.sqrt(x) * mpmath.log(D * mpmath.power(x, n)) / 6
    got = K.bound_eval("conditional_error", x=x, D_L=D, n_L=n, class_size=1, group_order=6)
    assert got == pytest.approx(float(expected), rel=1e-10)


def test_unconditional_error_exceptional_term():
    plain = K.bound_eval("unconditional_error", x=1e6, n_L=6)
    with_zero = K.bound_eval("unconditional_error", x=1e6, n_L=6, beta0=0.9, class_size=2, group_order=6)
    extra = float(mpmath.li(1e6**0.9) - mpmath.li(2)) / 3
    assert with_zero - plain == pytest.approx(extra, rel=1e-9)


@pytest.mark.parametrize(
    "kind,args",
    [
        ("nope", {}),
        ("torsion_bound", dict(D=-1, n=2, ell=3)),
        ("torsion_bound", dict(D=10, n=1, ell=3)),
        ("conditional_error", dict(x=1, D_L=10, n_L=2)),
        ("unconditional_error", dict(x=100, n_L=2, beta0=1.5)),
        ("silverman", dict(D=10)),
    ],
)
def test_bound_errors(kind, args):
    with pytest.raises(ValidationError):
        K.bound_eval(kind, **args)


# --- audit -------------------------------------------------------------------


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_audit_passes(name):
    rep = K.envelope_audit(K.preset(name), n_samples=200, seed=1)
    assert rep.passed, (rep.term_failures, rep.condition_failures)
    assert rep.n_samples == 200


def test_audit_is_deterministic():
    a = K.envelope_audit(K.preset("d5"), n_samples=30, seed=7)
    b = K.envelope_audit(K.preset("d5"), n_samples=30, seed=7)
    assert [(s.log_D, s.log_x) for s in a.samples] == [(s.log_D, s.log_x) for s in b.samples]


def test_audit_rejects_zero_samples():
    with pytest.raises(ValidationError):
        K.envelope_audit(K.preset("s3"), n_samples=0)


def test_binding_conditions_below_threshold():
    cfg = K.preset("s3")
    delta = K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)
    conds, terms = K.binding_conditions(cfg, delta, delta, 1e6, 10.0)
    assert set(conds) == set(K.X_CONDITIONS)
    assert terms


def test_binding_conditions_clear_at_x0():
    cfg = K.preset("s3")
    delta = K.delta_of(cfg.eps0, cfg.m, cfg.group_order, cfg.d)
    lD = mpmath.exp(mpmath.log(K.thresholds(cfg).log_max) + 1)
    lx = K.cheb_params(cfg).log_x0(lD)
    assert K.binding_conditions(cfg, delta, delta, lD, lx) == ((), ())


# --- report --------------------------------------------------------------------


def test_report_rows_and_csv():
    rep = K.constants_report(K.preset("s3"), audit_samples=20, log10_D_values=(10, 100))
    keys = [k for k, _ in rep.rows()]
    assert keys[0] == "preset" and "delta" in keys and "audit.status" in keys
    assert dict(rep.rows())["delta"] == "1/324"
    csv = rep.to_csv().splitlines()
    assert csv[0] == "key,value" and len(csv) == len(keys) + 1
    assert rep.to_csv() == K.constants_report(K.preset("s3"), audit_samples=20, log10_D_values=(10, 100)).to_csv()


@pytest.mark.parametrize("A", [2, 3, 5])
def test_report_rejects_delta_before_thresholds_become_infeasible(A):
    cfg = K.preset("s3", A=A)
    with pytest.raises(ValidationError):
        K.constants_report(cfg, delta=Fraction(1, 2 * A) + Fraction(1, 1000))
    assert Fraction(1, 2 * A) < Fraction(1, A + 1) < Fraction(2, 2 * A + 1)
