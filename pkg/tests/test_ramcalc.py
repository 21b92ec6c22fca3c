from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebfam import permgroup as pg
from chebfam import ramcalc as rc
from chebfam.errors import ValidationError
from chebfam.permgroup import Perm

GOLDEN = [
    ("sn", 5, "table_s5.csv"),
    ("s4", None, "table_s4.csv"),
    ("a4", None, "table_a4.csv"),
    ("dp", 5, "table_d5.csv"),
    ("c2p", 3, "table_c6.csv"),
    ("d4", None, "table_d4.csv"),
]

BRACKET_GROUPS = (
    [f"S{n}" for n in range(3, 7)] + ["A4", "A5"] + [f"D{m}" for m in range(3, 8)] + [f"C{n}" for n in range(2, 13)]
)


@pytest.mark.parametrize("preset,param,fixture", GOLDEN)
def test_golden_tables(preset, param, fixture, fixture_text):
    assert rc.ram_table(preset, param).to_csv() == fixture_text(fixture)


@pytest.mark.parametrize("preset,param,_", GOLDEN)
def test_rows_agree_with_tame_exponents(preset, param, _):
    table = rc.ram_table(preset, param)
    G = table.group
    for row in table.rows:
        ex = rc.tame_exponents(G, G.n, table.fixed_field_subgroups, row.representative)
        assert row.exponents == ex.as_tuple()[-len(row.exponents):] or row.exponents == ex.as_tuple()


def test_a4_double_transposition():
    G = pg.alternating(4)
    K4 = rc.named_subgroups(G)["K4"]
    ex = rc.tame_exponents(G, 4, [K4], Perm.from_cycles(4, [(0, 1), (2, 3)]))
    assert ex.as_tuple() == (2, 6, 0)


def test_s4_four_cycle():
    G = pg.symmetric(4)
    subs = rc.named_subgroups(G)
    ex = rc.tame_exponents(G, 4, [subs["K4"], subs["A4"]], Perm.from_cycles(4, [(0, 1, 2, 3)]))
    assert ex.as_tuple() == (3, 18, 3, 1)


def test_identity_all_zero():
    G = pg.symmetric(4)
    subs = rc.named_subgroups(G)
    assert set(rc.tame_exponents(G, 4, [subs["K4"]], G.identity).as_tuple()) == {0}


def test_non_normal_subgroup_rejected():
    G = pg.symmetric(4)
    H = pg.subgroup(G, [Perm.from_cycles(4, [(0, 1)])])
    with pytest.raises(ValidationError):
        rc.tame_exponents(G, 4, [H], Perm.from_cycles(4, [(0, 1)]))


@pytest.mark.parametrize("preset,param", [("sn", 2), ("dp", 4), ("c2p", 9), ("q8", None)])
def test_bad_table_parameters(preset, param):
    with pytest.raises(ValidationError):
        rc.ram_table(preset, param)


def test_dp_rows():
    rows = {r.label: r.exponents for r in rc.ram_table("dp", 5).rows}
    assert rows["(25)(34)"] == (2, 5, 1)
    assert rows["(12345)"] == (4, 8, 0)


def test_c6_row():
    rows = {r.label: r.exponents for r in rc.ram_table("c2p", 3).rows}
    assert rows["(1,0)"] == (3, 0, 1)


def test_d4_row():
    rows = {r.label: r.exponents for r in rc.ram_table("d4").rows}
    assert rows["(1234)"] == (3, 6, 0, 1, 1)


def test_text_rendering_has_rule(fixture_text):
    text = rc.ram_table("a4").to_text()
    lines = text.splitlines()
    assert lines[0] == "A4" and set(lines[2]) <= {"-", " "}
    assert len(lines) == 3 + 4


# --- ratio bracket -------------------------------------------------------------


@pytest.mark.parametrize("name", BRACKET_GROUPS)
def test_bracket_every_preset(name):
    b = rc.disc_ratio_bounds(pg.preset(name))
    assert b.within_bracket
    assert b.lower_bracket <= b.min_ratio <= b.max_ratio <= b.upper_bracket


def test_s3_ratios():
    b = rc.disc_ratio_bounds(pg.symmetric(3))
    assert (b.min_ratio, b.max_ratio) == (2, 3)


def test_d5_ratios():
    b = rc.disc_ratio_bounds(pg.dihedral(5))
    assert (b.min_ratio, b.max_ratio) == (2, Fraction(5, 2))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_transposition_attains_upper(n):
    b = rc.disc_ratio_bounds(pg.symmetric(n))
    assert b.max_ratio == b.upper_bracket


def test_wild_constant_is_a_log():
    import math

    b = rc.disc_ratio_bounds(pg.symmetric(4))
    assert b.wild_constant_log == pytest.approx(2 * 16 * math.log(24) ** 2)


# --- relations with fixed fields -------------------------------------------------


def test_s4_k4_relation():
    G = pg.symmetric(4)
    rel = rc.mult_relation(G, 4, rc.named_subgroups(G)["K4"], rc.inertia_type(G))
    assert rel.controlled and rel.exponent_ratio == Fraction(1, 3)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_dp_relation(p):
    G = pg.dihedral(p)
    rel = rc.mult_relation(G, p, rc.named_subgroups(G)[f"C{p}"], rc.inertia_type(G))
    assert rel.controlled and rel.exponent_ratio == Fraction(p - 1, 2)


def test_d4_uncontrolled():
    G = pg.dihedral(4)
    cls = pg.class_of(G, Perm.from_cycles(4, [(0, 2), (1, 3)]))
    rel = rc.mult_relation(G, 4, rc.named_subgroups(G)["K4"], rc.InertiaSpec((cls,)))
    assert not rel.controlled and not rel.family_valid


def test_non_generating_inertia_rejected():
    G = pg.symmetric(4)
    cls = pg.class_of(G, Perm.from_cycles(4, [(0, 1, 2)]))
    with pytest.raises(ValidationError):
        rc.mult_relation(G, 4, rc.named_subgroups(G)["A4"].__class__(n=4, elements=(G.identity,)), rc.InertiaSpec((cls,)))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_sn_an_ratio_one(n):
    G = pg.symmetric(n)
    rel = rc.mult_relation(G, n, rc.named_subgroups(G)[f"A{n}"], rc.inertia_type(G))
    assert rel.exponent_ratio == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=12))
def test_cyclic_full_order_exponents(n):
    G = pg.cyclic(n)
    gen = Perm(tuple((i + 1) % n for i in range(n)))
    subs = [H for H in pg.normal_subgroups(G) if 1 < H.order < n]
    ex = rc.tame_exponents(G, n, subs, gen)
    assert ex.e_K == n - 1
    assert all(1 <= e <= n - 1 for e in ex.e_fixed)


def test_empty_inertia_rejected():
    with pytest.raises(ValidationError):
        rc.InertiaSpec(())
