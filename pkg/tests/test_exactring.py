"""Ring arithmetic, substitution, annihilators, monic division, grammar."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chevelem.errors import (
    BaseMismatch,
    NotMonic,
    ParseError,
    SearchBoundExceeded,
)
from chevelem.exactring import (
    BaseRing,
    MonicLocElem,
    MultiPoly,
    annihilator_exponent,
    as_univariate_in,
    base_ring_from_str,
    convert,
    denominator_lcm,
    emit_poly,
    lift_mod_to_integers,
    localize_eq,
    monic_divrem,
    parse_poly,
    poly_op,
    poly_s_valuation,
    s_valuation,
)

Z = BaseRing.integers()
Q = BaseRing.rationals()
Z4 = BaseRing.integers_mod(4)
Z8 = BaseRing.integers_mod(8)
Z12 = BaseRing.integers_mod(12)
F5 = BaseRing.prime_field(5)
ZHALF = BaseRing.integers_localized(2)


def P(text, base=Z, nvars=1):
    return parse_poly(text, base, nvars)


# -- base rings -------------------------------------------------------------


def test_base_ring_validation():
    with pytest.raises(ValueError):
        BaseRing.integers_mod(1)
    with pytest.raises(ValueError):
        BaseRing.prime_field(6)
    with pytest.raises(ValueError):
        BaseRing.integers_localized(0)


def test_base_ring_str_roundtrip():
    for b in (Z, Q, Z12, F5, ZHALF):
        assert base_ring_from_str(str(b)) == b


def test_localized_units():
    assert ZHALF.is_unit(Fraction(4))
    assert ZHALF.is_unit(Fraction(-1, 8))
    assert not ZHALF.is_unit(Fraction(3))
    assert ZHALF.unit_inverse(Fraction(4)) == Fraction(1, 4)


def test_localized_denominator_check():
    with pytest.raises(BaseMismatch):
        ZHALF.from_fraction(Fraction(1, 3))
    assert ZHALF.from_fraction(Fraction(3, 8)) == Fraction(3, 8)


# -- polynomial arithmetic: spec examples ------------------------------------


def test_add_example():
    assert poly_op("add", P("x1+1"), P("x1-1")) == P("2*x1")


def test_mul_example():
    assert poly_op("mul", P("1+2*x1"), P("1-2*x1")) == P("1-4*x1^2")


def test_mul_mod4_kills():
    p = P("2*x1", Z4)
    assert poly_op("mul", p, p).is_zero()


def test_substitute_dilation():
    p = P("x1^2+1")
    two_x = P("2*x1")
    assert p.substitute({0: two_x}) == P("4*x1^2+1")


def test_substitute_at_zero():
    p = P("x1^2+x1+5")
    assert p.substitute({0: MultiPoly.zero(Z, 1)}) == P("5")


def test_substitute_mod8_vanishes():
    p = P("4*x1+2*x1^2", Z8)
    img = P("2*x1", Z8)
    assert p.substitute({0: img}).is_zero()


# -- ring axioms (property tests) --------------------------------------------

BASES = [Z, Q, Z4, Z12, F5, ZHALF]


@st.composite
def poly_triples(draw):
    base = draw(st.sampled_from(BASES))
    nvars = draw(st.integers(1, 2))

    def coeff():
        if base.kind in ("Q", "Zloc"):
            num = draw(st.integers(-6, 6))
            den = 2 ** draw(st.integers(0, 2))
            return Fraction(num, den)
        return draw(st.integers(-9, 9))

    def poly():
        terms = {}
        for _ in range(draw(st.integers(0, 3))):
            e = tuple(draw(st.integers(0, 2)) for _ in range(nvars))
            terms[e] = coeff()
        return MultiPoly(base, nvars, terms)

    return poly(), poly(), poly()


@settings(max_examples=80, deadline=None)
@given(poly_triples())
def test_ring_axioms(triple):
    p, q, r = triple
    assert (p + q) + r == p + (q + r)
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert (p - p).is_zero()


@settings(max_examples=60, deadline=None)
@given(poly_triples())
def test_substitute_is_homomorphism(triple):
    p, q, img = triple
    assignment = {0: img}
    lhs = (p * q).substitute(assignment)
    rhs = p.substitute(assignment) * q.substitute(assignment)
    assert lhs == rhs
    assert (p + q).substitute(assignment) == p.substitute(assignment) + q.substitute(
        assignment
    )


# -- annihilator exponents ----------------------------------------------------


def test_annihilator_mod4():
    assert annihilator_exponent(Z4, 2, 2) == 1


def test_annihilator_domain():
    assert annihilator_exponent(Z, 3, 2) is None


def brute_annihilator(m, d, s, limit=64):
    acc = d % m
    for n in range(limit):
        if acc == 0:
            return n
        acc = acc * s % m
    return None


def test_annihilator_mod12_matches_brute_force():
    # spec example: Z/12, d=3, s=2 -> 2
    assert brute_annihilator(12, 3, 2) == 2
    assert annihilator_exponent(Z12, 3, 2) == 2
    for d in range(12):
        for s in range(12):
            assert annihilator_exponent(Z12, d, s) == brute_annihilator(12, d, s)


def test_annihilator_bound_override():
    with pytest.raises(SearchBoundExceeded):
        annihilator_exponent(Z12, 3, 2, bound=1)


def test_localize_eq():
    assert localize_eq(P("2*x1", Z4), MultiPoly.zero(Z4, 1), 2)
    assert not localize_eq(P("x1"), MultiPoly.zero(Z, 1), 2)
    assert localize_eq(P("3*x1^2", Z12), MultiPoly.zero(Z12, 1), 2)


# -- valuations ---------------------------------------------------------------


def test_s_valuation():
    assert s_valuation(ZHALF, Fraction(6), 2) == 1
    assert s_valuation(ZHALF, Fraction(3, 8), 2) == -3
    assert s_valuation(Z, 12, 6) == 1
    assert s_valuation(Z, 0, 2) is None
    assert poly_s_valuation(P("2*x1 + 8", ZHALF), 2) == 1
    assert denominator_lcm(P("1/2*x1 + 1/3", Q)) == 6


# -- monic division ------------------------------------------------------------


def test_monic_divrem_simple():
    q, r = monic_divrem(P("x1^2+1"), P("x1"))
    assert q == P("x1") and r == P("1")


def test_monic_divrem_zero():
    q, r = monic_divrem(MultiPoly.zero(Z, 1), P("x1^2+1"))
    assert q.is_zero() and r.is_zero()


def test_monic_divrem_roundtrip_example():
    g, f = P("x1^3+2*x1+1"), P("x1^2+1")
    q, r = monic_divrem(g, f)
    assert q * f + r == g
    assert r.degree_in(0) < f.degree_in(0)
    assert (q, r) == (P("x1"), P("x1+1"))


def test_monic_divrem_rejects_nonmonic():
    with pytest.raises(NotMonic):
        monic_divrem(P("x1"), P("2*x1+1"))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 4), st.integers(1, 3), st.data())
def test_monic_divrem_roundtrip_random(dg, df, data):
    g_terms = {
        (k,): data.draw(st.integers(-9, 9), label="g%d" % k) for k in range(dg + 1)
    }
    f_terms = {
        (k,): data.draw(st.integers(-9, 9), label="f%d" % k) for k in range(df)
    }
    f_terms[(df,)] = 1
    g = MultiPoly(Z, 1, g_terms)
    f = MultiPoly(Z, 1, f_terms)
    q, r = monic_divrem(g, f)
    assert q * f + r == g
    assert r.is_zero() or r.degree_in(0) < f.degree_in(0)


# -- conversions -----------------------------------------------------------------


def test_convert_directions():
    p = P("2*x1+6")
    assert convert(p, Q).base == Q
    assert convert(convert(p, Q), Z) == p
    assert convert(p, Z4) == P("2*x1+2", Z4)
    with pytest.raises(BaseMismatch):
        convert(P("1/2*x1", Q), Z)
    with pytest.raises(BaseMismatch):
        convert(P("2*x1", Z4), Z)
    lifted = lift_mod_to_integers(P("3*x1", Z4))
    assert lifted == P("3*x1")


def test_convert_localized():
    p = P("1/2*x1 + 3", Q)
    loc = convert(p, ZHALF)
    assert loc.base == ZHALF
    with pytest.raises(BaseMismatch):
        convert(P("1/3*x1", Q), ZHALF)


# -- monic localization elements ---------------------------------------------


def test_monic_loc_equality_cross_multiplication():
    f = P("x1^2+1")
    a = MonicLocElem(P("x1^3+x1"), f, 1)  # x1 (x1^2+1) / (x1^2+1)
    b = MonicLocElem(P("x1"))
    assert a == b
    assert a.reduce().is_denominator_free()


def test_monic_loc_arithmetic():
    f = P("x1+1")
    g = P("x1^2+1")
    a = MonicLocElem(P("1"), f, 1)
    b = MonicLocElem(P("1"), g, 1)
    s = a + b
    # 1/f + 1/g = (f+g)/(fg)
    assert s == MonicLocElem(f + g, f * g, 1)
    prod = a * b
    assert prod == MonicLocElem(P("1"), f * g, 1)
    assert (a - a).is_zero()


def test_monic_loc_rejects_nonmonic_denominator():
    with pytest.raises(NotMonic):
        MonicLocElem(P("1"), P("2*x1"), 1)


# -- grammar ----------------------------------------------------------------------


def test_emit_canonical_order():
    p = P("1 + 4*x1^2")
    assert emit_poly(p) == "4*x1^2 + 1"


def test_emit_signs_and_units():
    assert emit_poly(P("x1^2 - 2*x1 + 1")) == "x1^2 - 2*x1 + 1"
    assert emit_poly(P("-x1")) == "-x1"
    assert emit_poly(MultiPoly.zero(Z, 1)) == "0"
    assert emit_poly(P("1/2*x1", Q)) == "1/2*x1"


def test_parse_emit_roundtrip():
    texts = ["4*x1^2 + 1", "x1*x2 - 3", "-x1^3 + 2*x1 - 7"]
    for t in texts:
        p = parse_poly(t, Z, 2)
        assert parse_poly(emit_poly(p), Z, 2) == p


def test_parse_grlex_tie_break():
    p = parse_poly("x2^2 + x1*x2", Z, 2)
    assert emit_poly(p) == "x1*x2 + x2^2"


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_poly("x1 +", Z, 1)
    with pytest.raises(ParseError):
        parse_poly("y1", Z, 1)
    with pytest.raises(ParseError):
        parse_poly("x2", Z, 1)
    with pytest.raises(ParseError):
        parse_poly("x1/x1", Q, 1)
    with pytest.raises(ParseError):
        parse_poly("(x1", Z, 1)


def test_parse_mod_base_reduces():
    assert parse_poly("5*x1", Z4, 1) == P("x1", Z4)
    assert parse_poly("1/3", F5, 1) == P("2", F5)  # 3*2 = 6 = 1 mod 5


def test_univariate_view():
    p = parse_poly("x1^2*x2 + x1^2 + 3", Z, 2)
    view = as_univariate_in(p, 0)
    assert set(view) == {0, 2}
    assert view[2] == parse_poly("x2 + 1", Z, 2)
