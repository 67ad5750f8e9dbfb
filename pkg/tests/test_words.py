"""Word evaluation, inversion, reduction, transport, congruence tags."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from chevelem.errors import BaseMismatch
from chevelem.exactring import BaseRing, MultiPoly, convert, parse_poly
from chevelem.rootdata import build_root_system, elem_unipotent
from chevelem.words import (
    ElemWord,
    congruence_check,
    eval_word,
    free_reduce,
    invert_word,
    map_word,
)

Z = BaseRing.integers()
ZHALF = BaseRing.integers_localized(2)
A2 = build_root_system("A", 2)
C2 = build_root_system("C", 2)

E12 = (1, -1, 0)
E21 = (-1, 1, 0)
E13 = (1, 0, -1)


def const(v, base=Z, nvars=1):
    return MultiPoly.const(base, nvars, v)


def rand_word(rng, rs, length, base=Z, nvars=1, max_deg=2, bound=5):
    letters = []
    for _ in range(length):
        root = rng.choice(rs.roots)
        terms = {}
        for _ in range(rng.randint(1, 2)):
            e = tuple(rng.randint(0, max_deg) for _ in range(nvars))
            c = rng.randint(-bound, bound)
            if c:
                terms[e] = terms.get(e, 0) + c
        arg = MultiPoly(base, nvars, terms)
        if not arg.is_zero():
            letters.append((root, arg))
    return ElemWord(rs, letters)


def test_empty_word_is_identity():
    assert eval_word(ElemWord.empty(A2), Z, 1).is_identity()


def test_eval_weyl_like_word():
    w = ElemWord(A2, [(E12, const(1)), (E21, const(-1)), (E12, const(1))])
    m = eval_word(w)
    expect = [[0, 1, 0], [-1, 0, 0], [0, 0, 1]]
    for i in range(3):
        for j in range(3):
            assert m.entries[i][j] == const(expect[i][j])


def test_eval_inverse_pair():
    t = parse_poly("x1^2-3", Z, 1)
    w = ElemWord(A2, [(E12, t), (E12, -t)])
    assert eval_word(w).is_identity()


def test_invert_single():
    t = parse_poly("x1", Z, 1)
    w = invert_word(ElemWord(A2, [(E12, t)]))
    assert w.letters == ((E12, -t),)


def test_free_reduce_merges():
    s, t = const(2), const(3)
    w = free_reduce(ElemWord(A2, [(E12, s), (E12, t)]))
    assert w.letters == ((E12, const(5)),)


def test_free_reduce_cancels():
    t = parse_poly("x1+1", Z, 1)
    w = free_reduce(ElemWord(A2, [(E13, t), (E12, t), (E12, -t), (E13, -t)]))
    assert len(w) == 0


def test_mixed_base_rejected():
    with pytest.raises(BaseMismatch):
        ElemWord(A2, [(E12, const(1)), (E21, const(1, base=ZHALF))])


def test_map_word_substitute():
    x = MultiPoly.variable(Z, 1, 0)
    w = ElemWord(A2, [(E12, x)])
    out = map_word(w, ("substitute", {0: x.scale(2)}))
    assert out.letters == ((E12, x.scale(2)),)


def test_map_word_localize():
    w = ElemWord(A2, [(E12, const(3))])
    out = map_word(w, ("localize", 2))
    assert out.letters[0][1].base == ZHALF


def test_eval_commutes_with_maps():
    rng = random.Random(31)
    x = MultiPoly.variable(Z, 1, 0)
    for _ in range(100):
        rs = rng.choice([A2, C2])
        w = rand_word(rng, rs, rng.randint(1, 5))
        if not w.letters:
            continue
        # substitution
        sub = ("substitute", {0: x.scale(rng.randint(-3, 3))})
        lhs = eval_word(map_word(w, sub))
        rhs = eval_word(w).substitute(sub[1], nvars_out=1)
        assert lhs == rhs
        # localization
        loc = map_word(w, ("localize", 2))
        assert eval_word(loc) == eval_word(w).map_entries(
            lambda p: convert(p, ZHALF)
        )


def test_eval_invert_property():
    rng = random.Random(37)
    for _ in range(25):
        rs = rng.choice([A2, C2])
        w = rand_word(rng, rs, rng.randint(0, 6))
        prod = eval_word(invert_word(w), Z, 1) * eval_word(w, Z, 1)
        assert prod.is_identity()


def test_free_reduce_preserves_eval():
    rng = random.Random(41)
    for _ in range(25):
        rs = rng.choice([A2, C2])
        w = rand_word(rng, rs, rng.randint(0, 6))
        assert eval_word(free_reduce(w), Z, 1) == eval_word(w, Z, 1)


def test_congruence_tag():
    z = MultiPoly.variable(Z, 1, 0)
    w = ElemWord(A2, [(E12, z * parse_poly("x1+2", Z, 1))])
    assert congruence_check(w, 0).holds
    w2 = ElemWord(A2, [(E12, const(1))])
    assert not congruence_check(w2, 0).holds


def test_congruence_commutator_pattern():
    z = MultiPoly.variable(Z, 1, 0)
    one = const(1)
    w = ElemWord(A2, [(E12, z), (E21, one), (E12, -z), (E21, -one)])
    assert congruence_check(w, 0).holds
