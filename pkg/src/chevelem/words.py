"""Elementary words: formal products of root unipotents.

A word is the only certificate format in this package: no matrix is ever
claimed to be a product of elementary generators without a word for it,
and words are always checkable by exact evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BaseMismatch, UnknownRoot
from .exactring import BaseRing, MultiPoly, convert
from .rootdata import GroupMatrix, RootSystem


class ElemWord:
    """Ordered letters (root, argument) denoting the product of x_root(arg)."""

    __slots__ = ("rs", "letters")

    def __init__(self, rs: RootSystem, letters):
        checked = []
        base = None
        nvars = None
        for root, arg in letters:
            root = rs.check_root(root)
            if base is None:
                base, nvars = arg.base, arg.nvars
            elif arg.base != base or arg.nvars != nvars:
                raise BaseMismatch("word letters over mixed rings")
            checked.append((root, arg))
        self.rs = rs
        self.letters = tuple(checked)

    @staticmethod
    def empty(rs: RootSystem) -> "ElemWord":
        return ElemWord(rs, [])

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ElemWord):
            return NotImplemented
        return self.rs == other.rs and self.letters == other.letters

    def __repr__(self) -> str:
        inner = ", ".join(
            "x[%s](%s)" % (",".join(map(str, r)), a.to_text()) for r, a in self.letters
        )
        return "ElemWord(%s)" % inner

    def base_and_nvars(self, default_base: BaseRing | None = None, default_nvars: int = 1):
        if self.letters:
            arg = self.letters[0][1]
            return arg.base, arg.nvars
        return default_base or BaseRing.integers(), default_nvars

    def concat(self, other: "ElemWord") -> "ElemWord":
        if self.rs != other.rs:
            raise BaseMismatch("words over different root systems")
        return ElemWord(self.rs, self.letters + other.letters)

    def max_degree(self) -> int:
        return max((arg.total_degree() for _, arg in self.letters), default=0)


@dataclass(frozen=True)
class CongruenceTag:
    """Checked witness that a word evaluates to the identity at z -> 0."""

    variable: int
    holds: bool


def eval_word(w: ElemWord, base: BaseRing | None = None, nvars: int | None = None) -> GroupMatrix:
    """Exact matrix product of the letters, in order.

    For the empty word the ambient ring is ambiguous; pass base/nvars
    explicitly or accept integers in one variable.
    """
    if w.letters:
        base, nvars = w.letters[0][1].base, w.letters[0][1].nvars
    else:
        base = base or BaseRing.integers()
        nvars = 1 if nvars is None else nvars
    m = GroupMatrix.identity(w.rs, base, nvars)
    for root, arg in w.letters:
        m = m.rmul_unipotent(root, arg)
    return m


def invert_word(w: ElemWord) -> ElemWord:
    return ElemWord(w.rs, [(r, -a) for r, a in reversed(w.letters)])


def free_reduce(w: ElemWord) -> ElemWord:
    """Merge adjacent same-root letters by additivity and drop zero args."""
    stack: list = []
    for root, arg in w.letters:
        if arg.is_zero():
            continue
        if stack and stack[-1][0] == root:
            merged = stack[-1][1] + arg
            stack.pop()
            if not merged.is_zero():
                stack.append((root, merged))
        else:
            stack.append((root, arg))
    return ElemWord(w.rs, stack)


def map_word(w: ElemWord, hom) -> ElemWord:
    """Transport a word along a ring homomorphism, letterwise.

    hom is ("localize", s) for the localization map, or
    ("substitute", assignment[, nvars_out]) for a variable substitution.
    Evaluation commutes with the transport either way.
    """
    kind = hom[0]
    if kind == "localize":
        s = hom[1]
        if not w.letters:
            return w
        base = w.letters[0][1].base
        target = _localized_target(base, s)
        return ElemWord(w.rs, [(r, convert(a, target)) for r, a in w.letters])
    if kind == "substitute":
        assignment = hom[1]
        nvars_out = hom[2] if len(hom) > 2 else None
        return ElemWord(
            w.rs, [(r, a.substitute(assignment, nvars_out)) for r, a in w.letters]
        )
    raise ValueError("unknown homomorphism kind %r" % (kind,))


def _localized_target(base: BaseRing, s: int) -> BaseRing:
    if base.kind == "Z":
        return BaseRing.integers_localized(s)
    if base.kind == "Zloc":
        return BaseRing.integers_localized(base.param * s)
    if base.kind == "Q":
        return base
    if base.kind == "Fp":
        if s % base.param == 0:
            raise BaseMismatch("cannot invert 0 in %s" % base)
        return base
    raise BaseMismatch("no localization of %s at %r here" % (base, s))


def congruence_check(w: ElemWord, z: int) -> CongruenceTag:
    """holds = True iff eval(w) becomes the identity under z -> 0."""
    base, nvars = w.base_and_nvars()
    if z >= nvars:
        raise UnknownRoot("variable index %d out of range" % z)
    m = eval_word(w)
    zero = MultiPoly.zero(base, nvars)
    at0 = m.substitute({z: zero}, nvars_out=nvars)
    return CongruenceTag(variable=z, holds=at0.is_identity())


def shift_word_base(w: ElemWord, new_base: BaseRing) -> ElemWord:
    """Exact coefficientwise base change of every argument."""
    return ElemWord(w.rs, [(r, convert(a, new_base)) for r, a in w.letters])


def extend_word_vars(w: ElemWord, nvars: int) -> ElemWord:
    return ElemWord(w.rs, [(r, a.extend_vars(nvars)) for r, a in w.letters])


def shrink_word_vars(w: ElemWord, nvars: int) -> ElemWord:
    return ElemWord(w.rs, [(r, a.shrink_vars(nvars)) for r, a in w.letters])
