from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stuffedmaps.errors import ResidueObstruction
from stuffedmaps.series import GradedSeries
from stuffedmaps.spectral import ZhukovskyFrame
from stuffedmaps.zforms import (ZForm, bergman, contract, expand_at_infinity, laurent, local_expand)

KEYS = [(0, k) for k in range(-3, 4)] + [(p, j) for p in (1, -1) for j in range(1, 4)]
POINTS = [Fraction(2), Fraction(-3, 2), Fraction(1, 3), Fraction(5, 7), Fraction(-4)]


@st.composite
def zrational(draw, label="z"):
    coeffs = {}
    for _ in range(draw(st.integers(1, 5))):
        coeffs[draw(st.sampled_from(KEYS))] = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 3)))
    return ZForm.one_var(label, coeffs)


def ev(f: ZForm, z) -> Fraction:
    v = f.evaluate({f.labels[0]: z}).value()
    return v.coeff(next(iter(v.terms))) if v.terms else Fraction(0)


def mono(key, c=1):
    return ZForm.monomial("z", key, c)


def test_gaussian_x():
    frame = ZhukovskyFrame.gaussian(2)
    x = frame.x("z")
    u = GradedSeries.u(1, trunc=2)
    assert x == laurent("z", {1: u, -1: u})
    assert x.iota("z", form=False) == x
    dx = frame.dx("z")
    for a in (1, -1):
        loc = local_expand(dx, "z", a, 1)
        assert loc.get(0).is_zero() and not loc.get(1).is_zero()


def test_iota_examples():
    assert mono((0, 1)).iota("z", form=False) == mono((0, -1))
    assert mono((1, 1)).iota("z", form=False) == mono((0, 0), -1) + mono((1, 1), -1)
    assert mono((0, -1)).iota("z") == mono((0, -1), -1)


@settings(max_examples=50, deadline=None)
@given(zrational())
def test_iota_involution(f):
    assert f.iota("z").iota("z") == f
    assert f.iota("z", form=False).iota("z", form=False) == f


@settings(max_examples=50, deadline=None)
@given(zrational())
def test_iota_preserves_values(f):
    g = f.iota("z", form=False)
    for z in POINTS:
        assert ev(g, z) == ev(f, 1 / z)


def test_s_delta_examples():
    z = mono((0, 1))
    assert z.op_S("z", form=False) == laurent("z", {1: 1, -1: 1})
    assert laurent("z", {1: 1, -1: 1}).op_Delta("z", form=False).is_zero()


@settings(max_examples=40, deadline=None)
@given(zrational(), zrational())
def test_polarization(f, g):
    S = lambda h: h.op_S("z", form=False)
    D = lambda h: h.op_Delta("z", form=False)
    assert S(f * g).scale(2) == S(f) * S(g) + D(f) * D(g)
    assert D(f * g).scale(2) == S(f) * D(g) + D(f) * S(g)


@settings(max_examples=40, deadline=None)
@given(zrational())
def test_s_delta_algebra(f):
    S = lambda h: h.op_S("z")
    D = lambda h: h.op_Delta("z")
    assert S(D(f)).is_zero() and D(S(f)).is_zero()
    assert S(S(f)) == S(f).scale(2)


@settings(max_examples=50, deadline=None)
@given(zrational(), zrational())
def test_normal_form_preserves_values(f, g):
    prod = f * g
    for z in POINTS:
        assert ev(prod, z) == ev(f, z) * ev(g, z)
    assert ev(f.d("z"), Fraction(3)) == sum(  # derivative by the quotient rule on one term at a time
        (ev(ZForm.one_var("z", {k: v}).d("z"), Fraction(3)) for k, v in f.coeffs().items()), Fraction(0))


def test_residue_examples():
    assert mono((1, 1)).residue("z", 1).value() == GradedSeries.const(1)
    assert mono((0, -2)).residue("z", 0).value().is_zero()


@settings(max_examples=50, deadline=None)
@given(zrational())
def test_residue_theorem(f):
    total = None
    for p in (0, 1, -1, "inf"):
        r = f.residue("z", p).value()
        total = r if total is None else total + r
    assert total.is_zero()


def test_contour_examples():
    assert mono((0, -1)).contour("z").value() == GradedSeries.const(1)
    for k in range(0, 4):
        assert mono((0, k)).contour("z").value().is_zero()


@settings(max_examples=50, deadline=None)
@given(zrational())
def test_contour_of_exact_form(f):
    assert f.d("z").contour("z").value().is_zero()


def test_primitive_obstruction():
    with pytest.raises(ResidueObstruction):
        mono((1, 1)).primitive("z")
    f = mono((1, 3)) + mono((0, -2)) + mono((0, 2))
    assert f.primitive("z").d("z") == f


def test_expand_at_infinity():
    unb, coeffs = expand_at_infinity(mono((1, 1)), 3)
    assert unb == {} and [c.coeff(next(iter(c.terms))) if c.terms else 0 for c in coeffs] == [0, 1, 1, 1]
    unb, coeffs = expand_at_infinity(laurent("z", {1: 1, -1: 1}), 1)
    assert list(unb) == [1] and coeffs[0].is_zero() and coeffs[1] == GradedSeries.const(1)


def test_pole_check_examples():
    assert bergman("z1", "z2").pole_check({"diagonal"})
    assert not bergman("z1", "z2").pole_check({1, -1})
    assert not mono((1, 1)).pole_check({-1})
    assert mono((1, 2)).pole_check({1, -1})
    assert not mono((0, -1)).pole_check({1, -1})  # dz/z has a simple pole at oo
    assert mono((0, -2)).pole_check({1, -1})


def test_dx_double_zero_structure():
    dx = ZhukovskyFrame.gaussian(1).dx("z")
    # dx / ((z - 1)(z + 1)) = u z**-2 dz is pole-free at +-1
    q = dx * (mono((1, 1)) * mono((-1, 1)))
    assert q.poles("z") <= {0}


def test_bergman_pairing_rules():
    f = laurent("zeta", {-2: 3, 1: 2})
    B = bergman("w", "zeta")
    assert B.pair("zeta", f) == -(laurent("w", {-2: 3}).d("w"))
    J = ZForm.kernel("w", "zeta", "J")
    assert J.pair("zeta", f) == -(laurent("w", {1: 2}).d("w").iota("w"))


def test_bergman_iota_and_diagonal():
    B = bergman("z", "w")
    assert B.iota("w").pairs == {"J": GradedSeries.const(-1)}
    jz = ZForm.kernel("z", "w", "J").restrict_diagonal("z", "w")
    for z in POINTS:
        assert ev(jz, z) == 1 / (1 - z * z) ** 2


def test_contract_matches_pair():
    a = ZForm(("x", "z"), {((0, -2), (0, 3)): 2, ((1, 2), (1, 1)): 1})
    b = laurent("z", {-4: 5, -1: 1})
    assert contract(a, b, "z") == a.pair("z", b)


def test_local_expansion_of_bergman():
    B = bergman("z", "w")
    loc = local_expand(B, "z", 1, 2)
    for n in range(3):
        assert loc.get(n) == ZForm.monomial("w", (1, n + 2), n + 1)


def test_serialization():
    f = mono((1, 2), Fraction(3, 4)) + mono((0, -1), 2)
    js = f.to_zrational_json()
    assert js["poly"][0][0] == -1 and js["poles"][0][:2] == [1, 2]
    assert js["poles"][0][2][0]["coeff"] == "3/4"
