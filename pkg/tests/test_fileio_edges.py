"""Serialization edges: localized bases, fraction literals, guards."""

from fractions import Fraction

import pytest

from chevelem.errors import BaseMismatch, NotAUnit, ParseError
from chevelem.exactring import BaseRing, MultiPoly, annihilator_exponent, parse_poly
from chevelem.fileio import word_from_dict, word_to_dict
from chevelem.rootdata import build_root_system, weyl_and_torus
from chevelem.words import ElemWord, eval_word

Z = BaseRing.integers()
ZHALF = BaseRing.integers_localized(2)
A2 = build_root_system("A", 2)


def test_localized_word_file_roundtrip():
    z = MultiPoly.variable(ZHALF, 1, 0)
    w = ElemWord(
        A2,
        [
            ((1, -1, 0), z.scale(Fraction(3, 4))),
            ((0, 1, -1), MultiPoly.const(ZHALF, 1, Fraction(-1, 2))),
        ],
    )
    d = word_to_dict(w)
    assert d["base"] == "Z[1/2]"
    assert d["letters"][0]["arg"] == "3/4*x1"
    again = word_from_dict(d)
    assert again == w
    assert eval_word(again, ZHALF, 1) == eval_word(w, ZHALF, 1)


def test_word_file_rejects_wrong_denominator():
    d = {
        "group": {"type": "A", "rank": 2},
        "base": "Z[1/2]",
        "nvars": 1,
        "letters": [{"root": [1, -1, 0], "arg": "1/3*x1"}],
    }
    with pytest.raises(BaseMismatch):
        word_from_dict(d)


def test_word_file_rejects_unknown_root():
    d = {
        "group": {"type": "A", "rank": 2},
        "base": "Z",
        "nvars": 1,
        "letters": [{"root": [2, -2, 0], "arg": "x1"}],
    }
    with pytest.raises(Exception):
        word_from_dict(d)


def test_header_nvars_bound():
    d = {"group": {"type": "A", "rank": 2}, "base": "Z", "nvars": 12, "letters": []}
    with pytest.raises(ParseError):
        word_from_dict(d)


def test_unknown_base_string():
    d = {"group": {"type": "A", "rank": 2}, "base": "R", "nvars": 1, "letters": []}
    with pytest.raises(ParseError):
        word_from_dict(d)


def test_annihilator_zero_multiplier():
    assert annihilator_exponent(Z, 5, 0) == 1
    assert annihilator_exponent(Z, 0, 0) == 0


def test_torus_with_localized_unit():
    u = MultiPoly.const(ZHALF, 1, Fraction(1, 2))
    w, h = weyl_and_torus(A2, (1, -1, 0), u)
    assert h.entries[0][0] == MultiPoly.const(ZHALF, 1, Fraction(1, 2))
    assert h.entries[1][1] == MultiPoly.const(ZHALF, 1, 2)
    with pytest.raises(NotAUnit):
        weyl_and_torus(A2, (1, -1, 0), MultiPoly.const(ZHALF, 1, Fraction(3)))
    # elements outside the localization are rejected at construction
    with pytest.raises(BaseMismatch):
        MultiPoly.const(ZHALF, 1, Fraction(1, 3))


def test_parse_fraction_literal_and_division():
    p = parse_poly("(3/4)*x1 - 1/2", BaseRing.rationals(), 1)
    assert p.terms[(1,)] == Fraction(3, 4)
    assert p.terms[(0,)] == Fraction(-1, 2)
