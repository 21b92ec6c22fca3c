import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from chebfam import fields as F
from chebfam import heights as Ht
from chebfam import poly as P
from chebfam.errors import ValidationError

X = sympy.Symbol("x")


def mp_mahler(f):
    with mpmath.workdps(30):
        roots = mpmath.polyroots(list(reversed(f)), maxsteps=200, extraprec=100)
        return float(abs(f[-1]) * mpmath.fprod(max(1, abs(r)) for r in roots))


coeff = st.integers(min_value=-20, max_value=20)


@st.composite
def squarefree_polys(draw, min_deg=1, max_deg=7):
    n = draw(st.integers(min_value=min_deg, max_value=max_deg))
    f = tuple(draw(st.lists(coeff, min_size=n, max_size=n))) + (draw(coeff.filter(bool)),)
    assume(P.discriminant(f) != 0)
    return f


@settings(max_examples=60, deadline=None)
@given(squarefree_polys())
def test_roots_oracle(f):
    ours = Ht.aberth_roots(f)
    with mpmath.workdps(30):
        ref = np.array([complex(r) for r in mpmath.polyroots(list(reversed(f)), maxsteps=200, extraprec=100)])
    assert len(ours) == len(ref)
    dist = np.abs(ours[:, None] - ref[None, :])
    # a bijection: every root has a distinct closest partner on the other side
    assert sorted(dist.argmin(axis=1).tolist()) == list(range(len(ref)))
    assert dist.min(axis=1).max() < 1e-7 * (1 + np.abs(ref).max())


@settings(max_examples=100, deadline=None)
@given(squarefree_polys())
def test_mahler_oracle(f):
    assert Ht.mahler_measure(f) == pytest.approx(mp_mahler(f), rel=1e-9)


@pytest.mark.parametrize(
    "f,expected",
    [
        ((-3, 2), 3.0),  # 3/2
        ((-1, -1, 1), math.sqrt((1 + math.sqrt(5)) / 2)),  # golden ratio
        ((1, 0, 1), 1.0),  # i, a root of unity
        ((-2, 0, 1), math.sqrt(2)),
        ((-1, -1, 0, 1), 1.324717957244746 ** (1 / 3)),  # plastic number
    ],
)
def test_height_examples(f, expected):
    assert Ht.weil_height(f) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(squarefree_polys(min_deg=1, max_deg=5))
def test_height_symmetries(f):
    assume(f[0] != 0 and P.is_irreducible(f))
    h = Ht.weil_height(f)
    reciprocal = tuple(reversed(f))  # minimal polynomial of 1/alpha
    negated = tuple(c * (-1) ** i for i, c in enumerate(f))  # of -alpha
    assert Ht.weil_height(reciprocal) == pytest.approx(h, rel=1e-9)
    assert Ht.weil_height(negated) == pytest.approx(h, rel=1e-9)
    assert h >= 1


@settings(max_examples=40, deadline=None)
@given(squarefree_polys(min_deg=1, max_deg=4), st.integers(min_value=-5, max_value=5))
def test_height_invariant_under_integer_translation_bound(f, k):
    # H(alpha + k) <= 2 max(1, |k|) H(alpha)
    assume(P.is_irreducible(f))
    shifted = P.trim(sympy.Poly(list(reversed(f)), X).compose(sympy.Poly(X - k, X)).all_coeffs()[::-1])
    assert Ht.weil_height(shifted) <= 2 * max(1, abs(k)) * Ht.weil_height(f) * (1 + 1e-9)


def test_weil_height_rejects_reducible():
    with pytest.raises(ValidationError):
        Ht.weil_height((-1, 0, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=5).flatmap(lambda n: st.lists(st.lists(coeff, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_berkowitz_oracle(M):
    expected = sympy.Matrix(M).charpoly(X).all_coeffs()[::-1]
    assert list(Ht.berkowitz_charpoly(M)) == [int(c) for c in expected]


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(min_value=-6, max_value=6), min_size=3, max_size=3),
    st.lists(st.integers(min_value=-3, max_value=3), min_size=3, max_size=3),
)
def test_minimal_polynomial_oracle(body, alpha):
    f = tuple(body) + (1,)
    assume(P.discriminant(f) != 0 and P.is_irreducible(f))
    theta = sympy.CRootOf(sympy.Poly(list(reversed(f)), X), 0)
    element = sum(a * theta**i for i, a in enumerate(alpha))
    mp, gen = Ht.minimal_polynomial(f, alpha)
    if any(alpha[1:]):
        ref = sympy.Poly(sympy.minimal_polynomial(element, X), X)
        assert gen
        assert to_tuple(ref) == tuple(mp)
    else:
        assert not gen


def to_tuple(p):
    g = [int(c) for c in p.all_coeffs()[::-1]]
    return tuple(P.primitive_part(g))


def test_monic_model():
    assert Ht.monic_model((1, 0, 2)) == [2, 0, 1]
    assert Ht.monic_model((1, 3, 0, 2)) == [4, 6, 0, 1]


# --- small generators -------------------------------------------------------------


def test_golden_field():
    r = Ht.small_generator((-1, -1, 1))
    assert r.disc == 5 and r.status == "found"
    assert r.height == pytest.approx(math.sqrt((1 + math.sqrt(5)) / 2), rel=1e-12)
    assert r.bound == pytest.approx(2 * 5**0.25)
    assert r.silverman_floor == pytest.approx(5**0.25 / math.sqrt(2))
    assert r.silverman_ok


def test_gaussian_field_sits_on_the_floor():
    r = Ht.small_generator((1, 0, 1))
    assert r.disc == -4 and r.height == pytest.approx(1.0)
    assert r.silverman_boundary and r.silverman_ok


def test_search_is_exhaustive_against_brute_force():
    f = (-1, -1, 0, 1)
    r = Ht.small_generator(f, search_height=2)
    best = math.inf
    for a in np.ndindex(5, 5, 5):
        alpha = [v - 2 for v in a]
        mp, gen = Ht.minimal_polynomial(f, alpha)
        if gen:
            best = min(best, Ht.weil_height(mp))
    assert r.height == pytest.approx(best, rel=1e-10)
    assert r.candidates == 125


def test_non_monic_field():
    r = Ht.small_generator((1, 0, 2))  # Q(sqrt(-2)) via a root of 2x^2 + 1
    assert r.disc == -8 and r.status == "found"
    assert r.height == pytest.approx(math.sqrt(2))


def test_zero_height_search_is_exhausted():
    r = Ht.small_generator((-1, -1, 0, 1), search_height=0)
    assert r.status == "exhausted" and r.alpha is None


@pytest.mark.parametrize(
    "f,kwargs",
    [((1, 1), {}), ((-1, 0, 1), {}), ((1, 0, 0, 0, 0, 0, 1), {}), ((-1, -1, 1), dict(search_height=-1)), ((-4, 0, 0, 1), {})],
)
def test_small_generator_rejections(f, kwargs):
    with pytest.raises(ValidationError):
        Ht.small_generator(f, **kwargs)


def test_cubics_meet_both_bounds():
    recs = F.enumerate_squarefree_disc_fields(3, 2000, 6)
    for rec in recs:
        r = Ht.small_generator(rec, search_height=4)
        assert r.silverman_ok and r.ruppert_weak_ok, rec


def test_csv():
    r = Ht.small_generator((-1, -1, 1), search_height=2)
    lines = Ht.smallgen_csv([r]).splitlines()
    assert lines[0] == "disc,alpha_coeffs,H,bound,ok"
    disc, alpha, h, bound, ok = lines[1].split(",")
    assert disc == "5" and ok == "1"
    assert float(h) == pytest.approx(r.height)


@pytest.mark.parametrize("f", [(0, 3, -13, -8, 20), (0, 0, 1), (0, 0, -2, 1)])
def test_roots_at_origin_are_exact(f):
    roots = Ht.aberth_roots(f)
    zeros = next(i for i, c in enumerate(f) if c)
    assert np.count_nonzero(roots == 0) >= zeros
    assert Ht.mahler_measure(f) == pytest.approx(mp_mahler(f), rel=1e-9)
