import math

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from chebfam import frobenius as fr
from chebfam import permgroup as pg
from chebfam.errors import CapExceededError, ConsistencyError, RamifiedPrimeError, ValidationError

X = sympy.Symbol("x")
CUBIC = (-1, -1, 0, 1)  # x^3 - x - 1, discriminant -23


def sympy_pattern(f, p):
    _, facs = sympy.Poly(list(reversed(f)), X, modulus=p).factor_list()
    return tuple(sorted((g.degree() for g, e in facs for _ in range(e)), reverse=True))


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13, 59, 101, 7919])
def test_pattern_oracle(p):
    assert fr.frobenius_pattern(CUBIC, p).parts == sympy_pattern(CUBIC, p)


def test_pattern_at_ramified_prime():
    with pytest.raises(RamifiedPrimeError):
        fr.frobenius_pattern(CUBIC, 23)


def test_pattern_needs_prime():
    with pytest.raises(ValidationError):
        fr.frobenius_pattern(CUBIC, 9)


def test_pattern_order_enforced():
    with pytest.raises(ValidationError):
        fr.FrobeniusPattern(5, (1, 2))


def test_counts_against_direct_factoring():
    pc = fr.pattern_counts(CUBIC, [500, 2000])
    direct = {}
    for p in sympy.primerange(2, 2001):
        if p == 23:
            continue
        direct.setdefault(sympy_pattern(CUBIC, p), [0, 0])
        direct[sympy_pattern(CUBIC, p)][1] += 1
        if p <= 500:
            direct[sympy_pattern(CUBIC, p)][0] += 1
    assert {k: list(v) for k, v in pc.counts.items()} == direct
    assert pc.ramified == (1, 1)
    assert pc.prime_counts == (sympy.primepi(500), sympy.primepi(2000))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(min_value=2, max_value=20000), min_size=1, max_size=6))
def test_counts_balance(grid):
    pc = fr.pattern_counts(CUBIC, grid)
    for i in range(len(pc.grid)):
        assert sum(v[i] for v in pc.counts.values()) + pc.ramified[i] == pc.prime_counts[i]


def test_pi_class_union():
    x = 5000
    split = fr.pi_class(CUBIC, (1, 1, 1), x)
    three = fr.pi_class(CUBIC, (3,), x)
    both = fr.pi_class(CUBIC, [(1, 1, 1), (3,)], x)
    assert both == split + three


def test_pi_class_rejects_missing_cycle_type():
    with pytest.raises(ValidationError):
        fr.pi_class((1, -3, 0, 1), (2, 1), 1000)  # cyclic cubic has no transpositions


def test_pi_class_rejects_non_partition():
    with pytest.raises(ValidationError):
        fr.pi_class(CUBIC, (2, 2), 1000)


@pytest.mark.parametrize("x", [2.5, 10, 100, 1e4, 1e6, 1e8])
def test_li_oracle(x):
    expected = float(mpmath.li(x) - mpmath.li(2))
    assert math.isclose(fr.li(x), expected, rel_tol=1e-11)


def test_li_domain():
    assert fr.li(2) == 0.0
    with pytest.raises(ValidationError):
        fr.li(1.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=2, max_value=1e7), st.floats(min_value=1.0, max_value=10.0))
def test_li_monotone(a, factor):
    assert fr.li(a * factor) >= fr.li(a)


def test_report_balanced_and_close():
    rep = fr.chebotarev_report(CUBIC, None, [10**4, 10**5])
    assert rep.group_label == "S3" and rep.group_order == 6
    assert rep.balanced()
    for c in rep.classes:
        assert abs(c.ratios[-1] - 1) < 0.1
    csv = rep.to_csv().splitlines()
    assert csv[0] == "x,class,count,main_term,normalized_error"
    assert len(csv) == 1 + 2 * 3


def test_report_wrong_label():
    with pytest.raises(ConsistencyError):
        fr.chebotarev_report(CUBIC, "C3", [1000])


def test_report_cap():
    with pytest.raises(CapExceededError):
        fr.chebotarev_report(CUBIC, None, [1000], cap=100)


def test_cycle_classes_merge_d4_reflections():
    classes = fr.cycle_classes(pg.dihedral(4))
    by_type = {c.cycle_type: c for c in classes}
    assert by_type[(2, 2)].merged and by_type[(2, 2)].size == 3
    assert sum(c.size for c in classes) == 8


def test_split_prime_checks():
    f = (1, -3, 0, 1)
    chk = fr.split_prime_checks(f, 1.0)
    assert chk.bound == pytest.approx(81)
    split = [p for p in sympy.primerange(2, 163) if p != 3 and sympy_pattern(f, p) == (1, 1, 1)]
    assert chk.split_count == sum(1 for p in split if p <= 81)
    assert chk.split_count_ok
    assert chk.dyadic_found == any(81 < p <= 162 for p in split)


def test_split_prime_sigma_range():
    with pytest.raises(ValidationError):
        fr.split_prime_checks(CUBIC, 0.0)
