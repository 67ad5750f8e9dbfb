"""End-to-end factorization into elementary words.

The pipeline is heuristic-first: a greedy adjugate-Bezout reduction runs
before the certified local-global machinery, because most desk-scale
inputs fall to it.  Every word produced anywhere is re-evaluated exactly
against its target before it is returned; NotFactored is a budget signal
and never a claim of non-membership.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    DescentBudgetExceeded,
    NotFactored,
    NotInGroup,
    PreconditionViolated,
)
from .exactring import (
    BaseRing,
    MonicLocElem,
    MultiPoly,
    convert,
    denominator_lcm,
    lift_mod_to_integers,
    monic_divrem,
)
from .localglobal import CoveringData, dilation_factor, patch
from .rootdata import GroupMatrix, RootSystem, membership_check
from .words import (
    ElemWord,
    eval_word,
    free_reduce,
    shift_word_base,
)

Z = BaseRing.integers()
Q = BaseRing.rationals()

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Budget:
    """Resource limits for searches; non-negative (zero means fail fast)."""

    max_letters: int = 60000
    max_degree: int = 400
    max_coeff_bits: int = 200000
    max_steps: int = 800

    def __post_init__(self):
        for name in ("max_letters", "max_degree", "max_coeff_bits", "max_steps"):
            if getattr(self, name) < 0:
                raise ValueError("%s must not be negative" % name)


DEFAULT_BUDGET = Budget()


@dataclass
class FactorizationCertificate:
    """g = eval(word) * residual_constant, with residual variable-free."""

    target: GroupMatrix
    word: ElemWord
    residual_constant: GroupMatrix
    verified: bool

    @property
    def word_length(self) -> int:
        return len(self.word)

    @property
    def max_degree(self) -> int:
        return self.word.max_degree()

    def check(self) -> bool:
        base, nvars = self.target.base, self.target.nvars
        prod = eval_word(self.word, base, nvars) * self.residual_constant
        return prod == self.target


def random_elementary_word(
    rs: RootSystem,
    seed: int,
    length: int,
    nvars: int = 1,
    max_degree: int = 2,
    coeff_bound: int = 5,
    base: BaseRing = Z,
) -> ElemWord:
    """Deterministic random word; the round-trip suites feed on these."""
    rng = random.Random(seed)
    letters = []
    while len(letters) < length:
        root = rng.choice(rs.roots)
        terms = {}
        for _ in range(rng.randint(1, 2)):
            e = tuple(rng.randint(0, max_degree) for _ in range(nvars))
            c = rng.randint(-coeff_bound, coeff_bound)
            if c:
                terms[e] = terms.get(e, 0) + c
        arg = MultiPoly(base, nvars, terms)
        if not arg.is_zero():
            letters.append((root, arg))
    return ElemWord(rs, letters)


# ---------------------------------------------------------------------------
# scalar contexts for the shared Euclidean engine


class _IntScalars:
    """Constant integer entries: sizes are absolute values."""

    def __init__(self, base: BaseRing, nvars: int):
        self.base = base
        self.nvars = nvars

    def size(self, p: MultiPoly):
        return abs(p.constant_term())

    def divmod(self, a: MultiPoly, b: MultiPoly):
        q, r = divmod(a.constant_term(), b.constant_term())
        return (
            MultiPoly.const(self.base, self.nvars, q),
            MultiPoly.const(self.base, self.nvars, r),
        )

    def is_unit(self, p: MultiPoly) -> bool:
        return p.is_constant() and p.constant_term() in (1, -1)

    def unit_inverse(self, p: MultiPoly) -> MultiPoly:
        return p


class _FieldPolyScalars:
    """Univariate entries over a field: sizes are shifted degrees."""

    def __init__(self, base: BaseRing, nvars: int, var: int = 0):
        self.base = base
        self.nvars = nvars
        self.var = var

    def size(self, p: MultiPoly):
        return 0 if p.is_zero() else p.degree_in(self.var) + 1

    def divmod(self, a: MultiPoly, b: MultiPoly):
        lead = _leading_coeff(b, self.var)
        inv = self.base.unit_inverse(lead)
        monic = b.scale(inv)
        q, r = monic_divrem(a, monic, self.var)
        return q.scale(inv), r

    def is_unit(self, p: MultiPoly) -> bool:
        return p.is_constant() and not p.is_zero()

    def unit_inverse(self, p: MultiPoly) -> MultiPoly:
        return MultiPoly.const(
            self.base, self.nvars, self.base.unit_inverse(p.constant_term())
        )


def _leading_coeff(p: MultiPoly, var: int):
    d = p.degree_in(var)
    best = None
    for e, c in p.terms.items():
        if e[var] == d and all(x == 0 for i, x in enumerate(e) if i != var):
            best = c
    if best is None:
        raise PreconditionViolated("entry is not univariate in the pivot variable")
    return best


class _OpRecorder:
    """Mutable matrix with left/right unipotent moves, recorded for replay."""

    def __init__(self, g: GroupMatrix):
        self.rs = g.rs
        self.base = g.base
        self.nvars = g.nvars
        self.m = [list(row) for row in g.entries]
        self.left: list = []
        self.right: list = []

    def lmul(self, root, t: MultiPoly) -> None:
        if t.is_zero():
            return
        updates = []
        for r, c, sign in self.rs.unipotent_terms[root]:
            coeff = t if sign == 1 else -t
            updates.append((r, [coeff * p for p in self.m[c]]))
        for r, add in updates:
            self.m[r] = [a + b for a, b in zip(self.m[r], add)]
        self.left.append((root, t))

    def rmul(self, root, t: MultiPoly) -> None:
        if t.is_zero():
            return
        size = len(self.m)
        updates = []
        for r, c, sign in self.rs.unipotent_terms[root]:
            coeff = t if sign == 1 else -t
            updates.append((c, [coeff * self.m[i][r] for i in range(size)]))
        for c, add in updates:
            for i in range(size):
                self.m[i][c] = self.m[i][c] + add[i]
        self.right.append((root, t))

    def matrix(self) -> GroupMatrix:
        return GroupMatrix(self.rs, self.m)

    def word(self) -> ElemWord:
        """Word w with eval(w) * current = original."""
        letters = [(root, -t) for root, t in self.left]
        letters += [(root, -t) for root, t in reversed(self.right)]
        return ElemWord(self.rs, letters)


def _root_a(n_ambient: int, i: int, j: int):
    v = [0] * n_ambient
    v[i], v[j] = 1, -1
    return tuple(v)


def _c_roots(n: int):
    def minus(i, j):
        v = [0] * n
        v[i], v[j] = 1, -1
        return tuple(v)

    def plus(i, j):
        v = [0] * n
        v[i] += 1
        v[j] += 1
        return tuple(v)

    def long_root(i, sign):
        v = [0] * n
        v[i] = 2 * sign
        return tuple(v)

    return minus, plus, long_root


def _reduce_type_a(rec: _OpRecorder, ctx) -> None:
    size = len(rec.m)
    one = MultiPoly.const(rec.base, rec.nvars, 1)
    for col in range(size):
        while True:
            nz = [r for r in range(col, size) if ctx.size(rec.m[r][col]) != 0]
            if not nz:
                raise NotInGroup("column collapses to zero; matrix is singular")
            if len(nz) == 1:
                break
            r_min = min(nz, key=lambda r: ctx.size(rec.m[r][col]))
            for r in nz:
                if r == r_min:
                    continue
                q, _ = ctx.divmod(rec.m[r][col], rec.m[r_min][col])
                rec.lmul(_root_a(size, r, r_min), -q)
        r0 = nz[0]
        if r0 != col:
            rec.lmul(_root_a(size, col, r0), one)
            rec.lmul(_root_a(size, r0, col), -one)
        d = rec.m[col][col]
        if d != one:
            if col == size - 1:
                raise NotInGroup("final pivot is not 1; determinant is not 1")
            if not ctx.is_unit(d):
                raise NotInGroup("column gcd %r is not a unit" % (d,))
            spare = col + 1
            rec.lmul(_root_a(size, spare, col), ctx.unit_inverse(d))
            rec.lmul(_root_a(size, col, spare), one - d)
            rec.lmul(_root_a(size, spare, col), -one)
        for r in range(size):
            if r != col and ctx.size(rec.m[r][col]) != 0:
                rec.lmul(_root_a(size, r, col), -rec.m[r][col])


def _reduce_type_c(rec: _OpRecorder, ctx) -> None:
    n = rec.rs.rank
    size = 2 * n
    star = lambda i: size - 1 - i
    minus, plus, long_root = _c_roots(n)
    one = MultiPoly.const(rec.base, rec.nvars, 1)

    def neg(v):
        return tuple(-x for x in v)

    for stage in range(n):
        col = stage
        # (a) gcd within each active hyperbolic pair via long-root ops
        for j in range(stage, n):
            while ctx.size(rec.m[star(j)][col]) != 0:
                a = rec.m[j][col]
                b = rec.m[star(j)][col]
                if ctx.size(a) == 0:
                    rec.lmul(long_root(j, 1), one)  # row j += row j*
                    rec.lmul(long_root(j, -1), -one)  # row j* -= row j
                    continue
                if ctx.size(b) >= ctx.size(a):
                    q, _ = ctx.divmod(b, a)
                    rec.lmul(long_root(j, -1), -q)
                else:
                    q, _ = ctx.divmod(a, b)
                    rec.lmul(long_root(j, 1), -q)
        # (b) gcd across the unstarred rows
        while True:
            nz = [r for r in range(stage, n) if ctx.size(rec.m[r][col]) != 0]
            if not nz:
                raise NotInGroup("column collapses to zero; not in the group")
            if len(nz) == 1:
                break
            r_min = min(nz, key=lambda r: ctx.size(rec.m[r][col]))
            for r in nz:
                if r == r_min:
                    continue
                q, _ = ctx.divmod(rec.m[r][col], rec.m[r_min][col])
                rec.lmul(minus(r, r_min), -q)
        r0 = nz[0]
        if r0 != stage:
            rec.lmul(minus(stage, r0), one)
            rec.lmul(minus(r0, stage), -one)
        # (c) normalize the pivot using the hyperbolic partner
        d = rec.m[stage][col]
        if d != one:
            if not ctx.is_unit(d):
                raise NotInGroup("column gcd %r is not a unit" % (d,))
            rec.lmul(long_root(stage, -1), ctx.unit_inverse(d))
            rec.lmul(long_root(stage, 1), one - d)
            rec.lmul(long_root(stage, -1), -one)
        # (d) clear the rest of the column
        for r in range(size):
            if r == stage:
                continue
            val = rec.m[r][col]
            if ctx.size(val) == 0:
                continue
            if r < n:
                rec.lmul(minus(r, stage), -val)
            elif r == star(stage):
                rec.lmul(long_root(stage, -1), -val)
            else:
                rec.lmul(neg(plus(stage, star(r))), -val)
        # (e) clear the pivot row by column operations
        for c in range(stage + 1, n):
            val = rec.m[stage][c]
            if ctx.size(val) != 0:
                rec.rmul(minus(stage, c), -val)
        for c in range(stage + 1, n):
            cc = star(c)
            val = rec.m[stage][cc]
            if ctx.size(val) != 0:
                rec.rmul(plus(stage, c), -val)
        val = rec.m[stage][star(stage)]
        if ctx.size(val) != 0:
            rec.rmul(long_root(stage, 1), -val)
        # the symplectic form forces the partner row and column clean
        _assert_stage_clean(rec, stage, star(stage))


def _assert_stage_clean(rec: _OpRecorder, idx: int, partner: int) -> None:
    size = len(rec.m)
    one_c = rec.base.one()
    for fixed in (idx, partner):
        for c in range(size):
            for p in (rec.m[fixed][c], rec.m[c][fixed]):
                if c == fixed:
                    if not (p.is_constant() and p.constant_term() == one_c):
                        raise NotInGroup("matrix does not preserve the symplectic form")
                elif not p.is_zero():
                    raise NotInGroup("matrix does not preserve the symplectic form")


def _finish_reduction(g: GroupMatrix, rec: _OpRecorder) -> ElemWord:
    final = rec.matrix()
    if not final.is_identity():
        raise NotInGroup("reduction did not reach the identity")
    word = free_reduce(rec.word())
    if eval_word(word, g.base, g.nvars) != g:
        raise NotInGroup("reduced word failed multiply-back verification")
    return word


def factor_integer_sl(g: GroupMatrix) -> ElemWord:
    """Euclidean factorization of a constant matrix in SL_N(Z)."""
    _require_constant_int(g)
    if g.rs.kind != "A":
        raise PreconditionViolated("type A matrix expected")
    if not membership_check(g, g.rs):
        raise NotInGroup("determinant is not 1")
    rec = _OpRecorder(g)
    _reduce_type_a(rec, _IntScalars(g.base, g.nvars))
    return _finish_reduction(g, rec)


def factor_integer_sp(g: GroupMatrix) -> ElemWord:
    """Pairwise Euclidean factorization of a constant matrix in Sp_2N(Z)."""
    _require_constant_int(g)
    if g.rs.kind != "C":
        raise PreconditionViolated("type C matrix expected")
    if not membership_check(g, g.rs):
        raise NotInGroup("matrix does not preserve the symplectic form")
    rec = _OpRecorder(g)
    _reduce_type_c(rec, _IntScalars(g.base, g.nvars))
    return _finish_reduction(g, rec)


def factor_integer_constant(g: GroupMatrix) -> ElemWord:
    return factor_integer_sl(g) if g.rs.kind == "A" else factor_integer_sp(g)


def _require_constant_int(g: GroupMatrix) -> None:
    if g.base.kind != "Z":
        raise PreconditionViolated("integer matrix expected")
    if not g.is_constant():
        raise PreconditionViolated("entries must be constant")


def factor_univar_euclidean(g: GroupMatrix, var: int = 0) -> ElemWord:
    """Division-based reduction over k[x] for a field k (Q or F_p)."""
    if not g.base.is_field:
        raise PreconditionViolated("field base ring expected")
    for row in g.entries:
        for p in row:
            for v in range(g.nvars):
                if v != var and p.degree_in(v) > 0:
                    raise PreconditionViolated("entries must be univariate")
    if not membership_check(g, g.rs):
        raise NotInGroup("matrix fails the group invariant")
    rec = _OpRecorder(g)
    ctx = _FieldPolyScalars(g.base, g.nvars, var)
    if g.rs.kind == "A":
        _reduce_type_a(rec, ctx)
    else:
        _reduce_type_c(rec, ctx)
    return _finish_reduction(g, rec)


# ---------------------------------------------------------------------------
# monic localization: words and reduction


class MonicWord:
    """Word whose arguments live in a monic localization."""

    __slots__ = ("rs", "letters")

    def __init__(self, rs: RootSystem, letters):
        self.rs = rs
        self.letters = tuple((rs.check_root(r), a) for r, a in letters)

    def __len__(self):
        return len(self.letters)

    def is_denominator_free(self) -> bool:
        return all(a.reduce().is_denominator_free() for _, a in self.letters)

    def eval(self, base: BaseRing, nvars: int):
        size = self.rs.matrix_size
        zero = MonicLocElem(MultiPoly.zero(base, nvars))
        one = MonicLocElem(MultiPoly.const(base, nvars, 1))
        m = [[one if i == j else zero for j in range(size)] for i in range(size)]
        for root, arg in self.letters:
            updates = []
            for r, c, sign in self.rs.unipotent_terms[root]:
                coeff = arg if sign == 1 else -arg
                updates.append((c, [coeff * m[i][r] for i in range(size)]))
            for c, add in updates:
                for i in range(size):
                    m[i][c] = m[i][c] + add[i]
        return m

    def to_elem_word(self, base: BaseRing) -> ElemWord:
        letters = []
        for root, arg in self.letters:
            red = arg.reduce()
            if not red.is_denominator_free():
                raise PreconditionViolated("word still carries monic denominators")
            letters.append((root, convert(red.num, base)))
        return ElemWord(self.rs, letters)


def _monic_det(entries, base: BaseRing, nvars: int) -> MonicLocElem:
    size = len(entries)
    memo: dict = {}
    one = MonicLocElem(MultiPoly.const(base, nvars, 1))
    zero = MonicLocElem(MultiPoly.zero(base, nvars))

    def rec(row: int, colmask: int) -> MonicLocElem:
        if row == size:
            return one
        hit = memo.get(colmask)
        if hit is not None:
            return hit
        acc = zero
        sign = 1
        for c in range(size):
            bit = 1 << c
            if not colmask & bit:
                continue
            p = entries[row][c]
            if not p.is_zero():
                sub = rec(row + 1, colmask & ~bit)
                term = p * sub
                acc = acc + (term if sign == 1 else -term)
            sign = -sign
        memo[colmask] = acc
        return acc

    return rec(0, (1 << size) - 1)


def _p_valuation(q: Fraction, p: int) -> int:
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    num = q.numerator
    while num % p == 0:
        num //= p
        v += 1
    den = q.denominator
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _is_p_integral(poly: MultiPoly, p: int) -> bool:
    return all(Fraction(c).denominator % p != 0 for c in poly.coefficients())


def _monic_invertible(e: MonicLocElem, p: int, var: int = 0):
    """Inverse of e in the monic localization over Z_(p), or None.

    e is invertible iff its numerator's leading coefficient in the pivot
    variable is a p-unit constant."""
    red = e.reduce()
    if red.num.is_zero():
        return None
    d = red.num.degree_in(var)
    lead = None
    for exps, c in red.num.terms.items():
        if exps[var] == d and all(x == 0 for i, x in enumerate(exps) if i != var):
            lead = c
    if lead is None:
        return None
    if _p_valuation(Fraction(lead), p) != 0:
        return None
    inv_lead = Fraction(1) / Fraction(lead)
    monic_num = red.num.scale(inv_lead)
    den_poly = red.denominator_poly().scale(inv_lead)
    if monic_num.is_constant():
        return MonicLocElem(den_poly)
    return MonicLocElem(den_poly, monic_num, 1)


class _MonicRecorder:
    """Op recorder over matrices of MonicLocElem."""

    def __init__(self, rs: RootSystem, entries, base: BaseRing, nvars: int):
        self.rs = rs
        self.base = base
        self.nvars = nvars
        self.m = [list(row) for row in entries]
        self.left: list = []
        self.right: list = []
        self.one = MonicLocElem(MultiPoly.const(base, nvars, 1))
        self.zero = MonicLocElem(MultiPoly.zero(base, nvars))

    def lmul(self, root, t: MonicLocElem) -> None:
        if t.is_zero():
            return
        updates = []
        for r, c, sign in self.rs.unipotent_terms[root]:
            coeff = t if sign == 1 else -t
            updates.append((r, [coeff * p for p in self.m[c]]))
        for r, add in updates:
            self.m[r] = [a + b for a, b in zip(self.m[r], add)]
        self.left.append((root, t))

    def rmul(self, root, t: MonicLocElem) -> None:
        if t.is_zero():
            return
        size = len(self.m)
        updates = []
        for r, c, sign in self.rs.unipotent_terms[root]:
            coeff = t if sign == 1 else -t
            updates.append((c, [coeff * self.m[i][r] for i in range(size)]))
        for c, add in updates:
            for i in range(size):
                self.m[i][c] = self.m[i][c] + add[i]
        self.right.append((root, t))

    def word(self) -> MonicWord:
        letters = [(root, -t) for root, t in self.left]
        letters += [(root, -t) for root, t in reversed(self.right)]
        merged: list = []
        for root, t in letters:
            if t.is_zero():
                continue
            if merged and merged[-1][0] == root:
                summed = merged[-1][1] + t
                merged.pop()
                if not summed.is_zero():
                    merged.append((root, summed))
            else:
                merged.append((root, t))
        return MonicWord(self.rs, merged)

    def entry_is(self, i: int, j: int, want_one: bool) -> bool:
        e = self.m[i][j]
        return (e - self.one).is_zero() if want_one else e.is_zero()

    def is_identity(self) -> bool:
        size = len(self.m)
        return all(
            self.entry_is(i, j, i == j) for i in range(size) for j in range(size)
        )


def _monic_pivot_hunt(rec: _MonicRecorder, rows, col: int, p: int, var: int, budget_steps: list):
    """Find or construct an invertible entry in the column; returns its row."""
    for r in rows:
        if _monic_invertible(rec.m[r][col], p, var) is not None:
            return r
    x = MonicLocElem(MultiPoly.variable(rec.base, rec.nvars, var))
    shears = [rec.one, x, x * x]
    minus, plus, long_root = _c_roots(rec.rs.rank) if rec.rs.kind == "C" else (None, None, None)
    size = len(rec.m)
    n = rec.rs.rank

    def shear_root(r, r2):
        if rec.rs.kind == "A":
            return _root_a(size, r, r2)
        star = lambda i: size - 1 - i
        if r < n and r2 < n:
            return minus(r, r2)
        if r < n <= r2:
            return long_root(r, 1) if star(r2) == r else plus(r, star(r2))
        if r2 < n <= r:
            return long_root(r2, -1) if star(r) == r2 else tuple(
                -x for x in plus(r2, star(r))
            )
        return minus(star(r2), star(r))

    for r in rows:
        for r2 in rows:
            if r == r2:
                continue
            root = shear_root(r, r2)
            primary = rec.rs.unipotent_terms[root][0]
            if primary[0] != r or primary[1] != r2:
                continue
            for t in shears:
                budget_steps[0] -= 1
                if budget_steps[0] < 0:
                    raise DescentBudgetExceeded("pivot search budget spent")
                rec.lmul(root, t)
                if _monic_invertible(rec.m[r][col], p, var) is not None:
                    return r
                rec.lmul(root, -t)
    return None


def factor_monic_localized(
    rs: RootSystem, entries, p: int, budget: Budget | None = None, var: int = 0
) -> MonicWord:
    """Reduce a matrix over the monic localization of Z_(p)[x].

    Entries are MonicLocElem over the rationals with p-integral parts.
    Pivots must be invertible in the localization (p-unit leading
    coefficient); pivot hunting is budgeted and the whole run fails
    closed, re-verifying the word by exact multiplication at the end.
    """
    budget = budget or DEFAULT_BUDGET
    base = Q
    size = rs.matrix_size
    if len(entries) != size or any(len(row) != size for row in entries):
        raise PreconditionViolated("matrix size does not match the root system")
    nvars = entries[0][0].num.nvars
    for row in entries:
        for e in row:
            if not (_is_p_integral(e.num, p) and _is_p_integral(e.den, p)):
                raise PreconditionViolated("entries must be p-integral")
    det = _monic_det(entries, base, nvars)
    one = MonicLocElem(MultiPoly.const(base, nvars, 1))
    if rs.kind == "A" and not (det - one).is_zero():
        raise NotInGroup("determinant is not 1 in the monic localization")
    if rs.kind == "C" and not (det - one).is_zero():
        raise NotInGroup("symplectic matrices have determinant 1")

    rec = _MonicRecorder(rs, entries, base, nvars)
    steps = [budget.max_steps]
    if rs.kind == "A":
        _monic_reduce_a(rec, p, var, steps)
    else:
        _monic_reduce_c(rec, p, var, steps)
    if not rec.is_identity():
        raise DescentBudgetExceeded("reduction stalled before the identity")
    word = rec.word()
    check = word.eval(base, nvars)
    for i in range(size):
        for j in range(size):
            if not (check[i][j] - entries[i][j]).is_zero():
                raise NotInGroup("monic word failed multiply-back verification")
    for _, arg in word.letters:
        red = arg.reduce()
        if not (_is_p_integral(red.num, p) and _is_p_integral(red.den, p)):
            raise NotInGroup("monic word argument is not p-integral")
    return word


def _monic_reduce_a(rec: _MonicRecorder, p: int, var: int, steps: list) -> None:
    size = len(rec.m)
    one = rec.one
    for col in range(size):
        rows = list(range(col, size))
        r0 = _monic_pivot_hunt(rec, rows, col, p, var, steps)
        if r0 is None:
            raise DescentBudgetExceeded("no invertible pivot found in column %d" % col)
        inv = _monic_invertible(rec.m[r0][col], p, var)
        if r0 != col:
            # zero the diagonal slot against the pivot, then swap it in
            if not rec.m[col][col].is_zero():
                rec.lmul(_root_a(size, col, r0), -(rec.m[col][col] * inv))
            rec.lmul(_root_a(size, col, r0), one)
            rec.lmul(_root_a(size, r0, col), -one)
            inv = _monic_invertible(rec.m[col][col], p, var)
        # clear the column with pivot-inverse-scaled steps
        for r in range(size):
            if r != col and not rec.m[r][col].is_zero():
                rec.lmul(_root_a(size, r, col), -(rec.m[r][col] * inv))
        d = rec.m[col][col]
        if not (d - one).is_zero():
            if col == size - 1:
                raise NotInGroup("final pivot is not 1")
            spare = col + 1
            rec.lmul(_root_a(size, spare, col), inv)
            rec.lmul(_root_a(size, col, spare), one - d)
            rec.lmul(_root_a(size, spare, col), -one)
        for c in range(size):
            if c != col and not rec.m[col][c].is_zero():
                rec.rmul(_root_a(size, col, c), -rec.m[col][c])


def _monic_reduce_c(rec: _MonicRecorder, p: int, var: int, steps: list) -> None:
    n = rec.rs.rank
    size = 2 * n
    star = lambda i: size - 1 - i
    minus, plus, long_root = _c_roots(n)
    one = rec.one

    def neg(v):
        return tuple(-x for x in v)

    for stage in range(n):
        col = stage
        rows = list(range(stage, n)) + [star(j) for j in range(stage, n)]
        r0 = _monic_pivot_hunt(rec, rows, col, p, var, steps)
        if r0 is None:
            raise DescentBudgetExceeded("no invertible pivot found in column %d" % col)
        if r0 >= n:
            # transfer the invertible entry into the unstarred slot
            j = star(r0)
            moved = False
            x = MonicLocElem(MultiPoly.variable(rec.base, rec.nvars, var))
            for t in (one, x, x * x, x * x * x):
                steps[0] -= 1
                if steps[0] < 0:
                    raise DescentBudgetExceeded("pivot transfer budget spent")
                rec.lmul(long_root(j, 1), t)
                if _monic_invertible(rec.m[j][col], p, var) is not None:
                    moved = True
                    break
                rec.lmul(long_root(j, 1), -t)
            if not moved:
                raise DescentBudgetExceeded("pivot transfer failed")
            r0 = j
        inv = _monic_invertible(rec.m[r0][col], p, var)
        if r0 != stage:
            if not rec.m[stage][col].is_zero():
                rec.lmul(minus(stage, r0), -(rec.m[stage][col] * inv))
            rec.lmul(minus(stage, r0), one)
            rec.lmul(minus(r0, stage), -one)
            inv = _monic_invertible(rec.m[stage][col], p, var)
        # clear the column: unstarred rows, then starred, partner last
        for r in range(stage + 1, n):
            val = rec.m[r][col]
            if not val.is_zero():
                rec.lmul(minus(r, stage), -(val * inv))
        for r in range(stage + 1, n):
            rr = star(r)
            val = rec.m[rr][col]
            if not val.is_zero():
                rec.lmul(neg(plus(stage, r)), -(val * inv))
        val = rec.m[star(stage)][col]
        if not val.is_zero():
            rec.lmul(long_root(stage, -1), -(val * inv))
        d = rec.m[stage][col]
        if not (d - one).is_zero():
            rec.lmul(long_root(stage, -1), inv)
            rec.lmul(long_root(stage, 1), one - d)
            rec.lmul(long_root(stage, -1), -one)
        for c in range(stage + 1, n):
            val = rec.m[stage][c]
            if not val.is_zero():
                rec.rmul(minus(stage, c), -val)
        for c in range(stage + 1, n):
            val = rec.m[stage][star(c)]
            if not val.is_zero():
                rec.rmul(plus(stage, c), -val)
        val = rec.m[stage][star(stage)]
        if not val.is_zero():
            rec.rmul(long_root(stage, 1), -val)
        for fixed in (stage, star(stage)):
            for c in range(size):
                if not rec.entry_is(fixed, c, c == fixed):
                    raise NotInGroup("matrix does not preserve the symplectic form")
                if not rec.entry_is(c, fixed, c == fixed):
                    raise NotInGroup("matrix does not preserve the symplectic form")


def descend_monic(
    g: GroupMatrix, w_f: MonicWord, f: MultiPoly, budget: Budget | None = None
) -> ElemWord:
    """Recover a denominator-free word from one over a monic localization.

    Denominator-free words pass straight through; otherwise the matrix is
    re-factored directly under budget.  Fail-closed: no unverified word.
    """
    budget = budget or DEFAULT_BUDGET
    base, nvars = g.base, g.nvars
    mm = w_f.eval(Q, nvars)
    g_q = g.map_entries(lambda pp: convert(pp, Q))
    size = g.rs.matrix_size
    for i in range(size):
        for j in range(size):
            if not (mm[i][j] - MonicLocElem(g_q.entries[i][j])).is_zero():
                raise PreconditionViolated("word does not evaluate to the matrix")
    if w_f.is_denominator_free():
        word = w_f.to_elem_word(base)
        if eval_word(word, base, nvars) != g:
            raise PreconditionViolated("lifted word failed verification")
        return word
    if budget.max_steps == 0:
        raise DescentBudgetExceeded("descent budget is zero")
    word, residual = heuristic_reduce(g, budget)
    if residual.is_identity():
        return word
    if residual.is_constant():
        tail = None
        if base.kind == "Z":
            tail = factor_integer_constant(residual)
        elif base.is_field:
            tail = factor_univar_euclidean(residual)
        if tail is not None:
            word = free_reduce(word.concat(tail))
            if eval_word(word, base, nvars) == g:
                return word
    raise DescentBudgetExceeded("no denominator-free word found within budget")


# ---------------------------------------------------------------------------
# the greedy heuristic


def try_divide(a: MultiPoly, b: MultiPoly):
    """Exact quotient a / b, or None.  Graded-lex leading-term division."""
    if b.is_zero():
        return None
    if a.is_zero():
        return MultiPoly.zero(a.base, a.nvars)
    base = a.base
    q_terms: dict = {}
    r = a
    lead_b = max(b.terms, key=lambda e: (sum(e), e))
    cb = b.terms[lead_b]
    steps = 0
    limit = 4 * (len(a.terms) + len(b.terms) + 4)
    while not r.is_zero():
        steps += 1
        if steps > limit:
            return None
        lead_r = max(r.terms, key=lambda e: (sum(e), e))
        cr = r.terms[lead_r]
        exps = tuple(x - y for x, y in zip(lead_r, lead_b))
        if any(e < 0 for e in exps):
            return None
        if base.kind == "Fp":
            coeff = cr * pow(cb, -1, base.param) % base.param
        else:
            try:
                coeff = base.from_fraction(Fraction(cr) / Fraction(cb))
            except Exception:
                return None
        q_terms[exps] = coeff
        r = r - MultiPoly(base, a.nvars, {exps: coeff}) * b
    return MultiPoly(base, a.nvars, q_terms)


def _poly_size(p: MultiPoly, degw: int = 1, bitw: int = 1) -> int:
    total = 0
    for e, c in p.terms.items():
        cf = Fraction(c)
        total += 1 + degw * sum(e) ** 2 + bitw * (
            abs(cf.numerator).bit_length() + cf.denominator.bit_length()
        )
    return total


def _line_size(p: MultiPoly, i: int, j: int, degw: int = 1, bitw: int = 1) -> int:
    if i == j:
        return _poly_size(p - MultiPoly.const(p.base, p.nvars, 1), degw, bitw)
    return _poly_size(p, degw, bitw)


def _matrix_size(m, degw: int = 1, bitw: int = 1) -> int:
    total = 0
    for i, row in enumerate(m):
        for j, p in enumerate(row):
            total += _line_size(p, i, j, degw, bitw)
    return total


def partial_quotient(a: MultiPoly, b: MultiPoly):
    """Leading-term division of a by b as far as it goes exactly.

    Unlike try_divide the remainder may be nonzero; the quotient is the
    move argument that strips a's leading terms against b."""
    if a.is_zero() or b.is_zero():
        return None
    base = a.base
    q_terms: dict = {}
    r = a
    lead_b = max(b.terms, key=lambda e: (sum(e), e))
    cb = b.terms[lead_b]
    limit = 2 * len(a.terms) + 8
    steps = 0
    while not r.is_zero() and steps < limit:
        steps += 1
        lead_r = max(r.terms, key=lambda e: (sum(e), e))
        cr = r.terms[lead_r]
        exps = tuple(x - y for x, y in zip(lead_r, lead_b))
        if any(e < 0 for e in exps):
            break
        if base.kind == "Fp":
            coeff = cr * pow(cb, -1, base.param) % base.param
        else:
            try:
                coeff = base.from_fraction(Fraction(cr) / Fraction(cb))
            except Exception:
                break
        q_terms[exps] = coeff
        r = r - MultiPoly(base, a.nvars, {exps: coeff}) * b
    if not q_terms:
        return None
    return MultiPoly(base, a.nvars, q_terms)


def _leading_floor_candidates(tgt: MultiPoly, src: MultiPoly):
    """Integer-Euclid steps on leading coefficients: floor and round."""
    if tgt.base.kind != "Z":
        return
    lead_t = max(tgt.terms, key=lambda e: (sum(e), e))
    lead_s = max(src.terms, key=lambda e: (sum(e), e))
    exps = tuple(x - y for x, y in zip(lead_t, lead_s))
    if any(e < 0 for e in exps):
        return
    ct, cs = tgt.terms[lead_t], src.terms[lead_s]
    qf = ct // cs
    qr = (2 * ct + cs) // (2 * cs)
    for qc in {qf, qr}:
        if qc:
            yield MultiPoly(tgt.base, tgt.nvars, {exps: qc})


def _candidate_args(m, rs: RootSystem, root, side: str):
    """Division-derived argument candidates for one unipotent move."""
    out = set()
    size = len(m)
    r1, c1, s1 = rs.unipotent_terms[root][0]
    pairs = []
    if side == "right":
        for i in range(size):
            pairs.append((m[i][c1], m[i][r1]))
    else:
        for j in range(size):
            pairs.append((m[r1][j], m[c1][j]))
    for tgt, src in pairs:
        if src.is_zero() or tgt.is_zero():
            continue
        for q in (try_divide(tgt, src), partial_quotient(tgt, src)):
            if q is not None and not q.is_zero():
                out.add(-q if s1 == 1 else q)
        for q in _leading_floor_candidates(tgt, src):
            out.add(-q if s1 == 1 else q)
    return out


def _move_delta(rec: _OpRecorder, root, t: MultiPoly, side: str, degw: int = 1, bitw: int = 1) -> int:
    """Size change of a candidate move, computed on the affected lines."""
    terms = rec.rs.unipotent_terms[root]
    size = len(rec.m)
    before = 0
    after = 0
    if side == "right":
        for r, c, sign in terms:
            coeff = t if sign == 1 else -t
            for i in range(size):
                old = rec.m[i][c]
                new = old + coeff * rec.m[i][r]
                before += _line_size(old, i, c, degw, bitw)
                after += _line_size(new, i, c, degw, bitw)
    else:
        for r, c, sign in terms:
            coeff = t if sign == 1 else -t
            for j in range(size):
                old = rec.m[r][j]
                new = old + coeff * rec.m[c][j]
                before += _line_size(old, r, j, degw, bitw)
                after += _line_size(new, r, j, degw, bitw)
    return after - before


def _constant_matrix(m) -> bool:
    return all(p.is_constant() for row in m for p in row)


def _rank1_difference(m):
    """Factor M - I = v w^T with w^T v = 0, or None.

    Such rank-one shapes (the Cohn block is one) factor exactly into an
    eight-letter commutator through any spare coordinate."""
    size = len(m)
    base = m[0][0].base
    nvars = m[0][0].nvars
    one = MultiPoly.const(base, nvars, 1)
    d = [[m[i][j] - one if i == j else m[i][j] for j in range(size)] for i in range(size)]
    if all(p.is_zero() for row in d for p in row):
        return None
    for i in range(size):
        for i2 in range(i + 1, size):
            for j in range(size):
                for j2 in range(j + 1, size):
                    minor = d[i][j] * d[i2][j2] - d[i][j2] * d[i2][j]
                    if not minor.is_zero():
                        return None
    trace = MultiPoly.zero(base, nvars)
    for i in range(size):
        trace = trace + d[i][i]
    if not trace.is_zero():
        return None

    def column(c):
        return [d[i][c] for i in range(size)]

    def row(r):
        return list(d[r])

    candidates = []
    for c in range(size):
        col = column(c)
        if any(not p.is_zero() for p in col):
            candidates.append(col)
            stripped = _strip_integer_content(col)
            if stripped is not None:
                candidates.append(stripped)
    for v in candidates:
        i0 = next(i for i in range(size) if not v[i].is_zero())
        w = []
        good = True
        for j in range(size):
            wj = try_divide(d[i0][j], v[i0])
            if wj is None:
                good = False
                break
            w.append(wj)
        if not good:
            continue
        if all((v[i] * w[j] - d[i][j]).is_zero() for i in range(size) for j in range(size)):
            dot = MultiPoly.zero(base, nvars)
            for i in range(size):
                dot = dot + w[i] * v[i]
            if dot.is_zero():
                return v, w
    return None


def _strip_integer_content(col):
    base = col[0].base
    if base.kind != "Z":
        return None
    g = 0
    for p in col:
        for c in p.coefficients():
            g = gcd(g, abs(c))
    if g <= 1:
        return None
    return [try_divide(p, MultiPoly.const(base, p.nvars, g)) for p in col]


def _rank1_update(rec: _OpRecorder) -> bool:
    """Apply the commutator word for (M - I) = v w^T; True on success."""
    if rec.rs.kind != "A":
        return False
    fact = _rank1_difference(rec.m)
    if fact is None:
        return False
    v, w = fact
    size = len(rec.m)
    spare = next(
        (s for s in range(size) if v[s].is_zero() and w[s].is_zero()), None
    )
    if spare is None:
        return False
    letters = []
    for i in range(size):
        if not v[i].is_zero():
            letters.append((_root_a(size, i, spare), v[i]))
    p_len = len(letters)
    for i in range(size):
        if not w[i].is_zero():
            letters.append((_root_a(size, spare, i), -w[i]))
    p_part = letters[:p_len]
    q_part = letters[p_len:]
    full = (
        p_part
        + q_part
        + [(r, -t) for r, t in reversed(p_part)]
        + [(r, -t) for r, t in reversed(q_part)]
    )
    for root, t in reversed(full):
        rec.lmul(root, t)
    return GroupMatrix(rec.rs, rec.m).is_identity()


_STRATEGIES = (
    (("right", "left"), 1, 1),
    (("right",), 1, 1),
    (("left",), 1, 1),
    (("right", "left"), 3, 0),
    (("right",), 3, 0),
    (("left",), 3, 0),
    (("right", "left"), 0, 1),
    (("right", "left"), 5, 1),
)


def _all_moves(rec: _OpRecorder, sides):
    for side in sides:
        for root in rec.rs.roots:
            for t in _candidate_args(rec.m, rec.rs, root, side):
                yield root, t, side


def _apply(rec: _OpRecorder, root, t, side) -> None:
    if side == "right":
        rec.rmul(root, t)
    else:
        rec.lmul(root, t)


def _snapshot(rec: _OpRecorder):
    return [row[:] for row in rec.m], len(rec.left), len(rec.right)


def _restore(rec: _OpRecorder, snap) -> None:
    m, nl, nr = snap
    rec.m = [row[:] for row in m]
    del rec.left[nl:]
    del rec.right[nr:]


def _greedy_pass(g: GroupMatrix, sides, degw: int, bitw: int, max_steps: int) -> _OpRecorder:
    """One strictly-descending greedy run with a two-ply escape at stalls."""
    rec = _OpRecorder(g)
    rs = g.rs
    steps = 0
    while steps < max_steps:
        steps += 1
        if _matrix_size(rec.m, degw, bitw) == 0:
            break
        best = None
        scored = []
        for root, t, side in _all_moves(rec, sides):
            delta = _move_delta(rec, root, t, side, degw, bitw)
            scored.append((delta, root, t, side))
            if delta < 0 and (best is None or delta < best[0]):
                best = (delta, root, t, side)
        if best is None and scored:
            # two-ply escape: allow one non-improving move when a follow-up
            # more than pays it back
            current = _matrix_size(rec.m, degw, bitw)
            snap = _snapshot(rec)
            scored.sort(key=lambda item: item[0])
            escaped = False
            for _, root, t, side in scored[:8]:
                _apply(rec, root, t, side)
                follow = None
                for root2, t2, side2 in _all_moves(rec, sides):
                    d2 = _move_delta(rec, root2, t2, side2, degw, bitw)
                    if follow is None or d2 < follow[0]:
                        follow = (d2, root2, t2, side2)
                if follow and _matrix_size(rec.m, degw, bitw) + follow[0] < current:
                    _apply(rec, follow[1], follow[2], follow[3])
                    escaped = True
                    break
                _restore(rec, snap)
            if escaped:
                continue
        if best is None:
            if not _constant_matrix(rec.m):
                if not _rank1_update(rec) and rs.kind == "A":
                    _closure_pass_a(rec)
                    _rank1_update(rec)
            break
        _apply(rec, best[1], best[2], best[3])
    return rec


def heuristic_reduce(g: GroupMatrix, budget: Budget | None = None):
    """Greedy elementary reduction: (word, residual) with word*residual = g.

    Division-guided moves shrink a size measure under a cascade of scoring
    strategies; stalls fall back to a two-ply escape, the rank-one
    commutator finisher, and the adjugate-Bezout column closure.  The
    residual is the identity on full success, constant when only the
    group-of-constants part remains, and the best stall state otherwise.
    """
    budget = budget or DEFAULT_BUDGET
    rs = g.rs
    best_rec = None
    best_score = None
    for sides, degw, bitw in _STRATEGIES:
        rec = _greedy_pass(g, sides, degw, bitw, budget.max_steps)
        if _constant_matrix(rec.m):
            best_rec = rec
            log.debug(
                "greedy pass sides=%s degw=%d bitw=%d reduced to constants, "
                "%d left ops %d right ops",
                sides, degw, bitw, len(rec.left), len(rec.right),
            )
            break
        score = _matrix_size(rec.m)
        log.debug(
            "greedy pass sides=%s degw=%d bitw=%d stalled at size %d",
            sides, degw, bitw, score,
        )
        if best_score is None or score < best_score:
            best_rec, best_score = rec, score
    rec = best_rec
    final = rec.matrix()
    if final.is_identity():
        word = free_reduce(rec.word())
        residual = final
    elif final.is_constant() and g.base.kind == "Z" and rec.right:
        # splice an integer word for the constant leftover between the
        # two op families so the residual can be the identity
        mid = factor_integer_constant(final)
        left_inv = ElemWord(rs, [(root, -t) for root, t in rec.left])
        right_inv = ElemWord(rs, [(root, -t) for root, t in reversed(rec.right)])
        word = free_reduce(left_inv.concat(mid).concat(right_inv))
        residual = GroupMatrix.identity(rs, g.base, g.nvars)
    else:
        # the leftover sits between the two op families; keep the left
        # word and fold the undone column ops into the residual
        word = free_reduce(ElemWord(rs, [(root, -t) for root, t in rec.left]))
        right_inv = ElemWord(rs, [(root, -t) for root, t in reversed(rec.right)])
        residual = final * eval_word(right_inv, g.base, g.nvars)
    if eval_word(word, g.base, g.nvars) * residual != g:
        raise NotInGroup("heuristic invariant broken")  # defensive; never expected
    return word, residual


def _closure_pass_a(rec: _OpRecorder) -> bool:
    """Adjugate-Bezout closure for type A: finish columns through zeros.

    Needs, per column, a zero entry among the unfinished rows (creating
    one by exact division when possible).  Returns True when the matrix
    reaches the identity; partial progress is kept either way.
    """
    size = len(rec.m)
    base, nvars = rec.base, rec.nvars
    one = MultiPoly.const(base, nvars, 1)
    for col in range(size):
        live = list(range(col, size))
        done = rec.m[col][col] == one and all(
            rec.m[r][col].is_zero() for r in range(size) if r != col
        ) and all(rec.m[col][c].is_zero() for c in range(size) if c != col)
        if done:
            continue
        zero_row = next((r for r in live if rec.m[r][col].is_zero()), None)
        if zero_row is None:
            for r in live:
                for r2 in live:
                    if r == r2:
                        continue
                    q = try_divide(rec.m[r][col], rec.m[r2][col])
                    if q is not None:
                        rec.lmul(_root_a(size, r, r2), -q)
                        zero_row = r
                        break
                if zero_row is not None:
                    break
        if zero_row is None:
            return False
        adj = GroupMatrix(rec.rs, rec.m).adjugate()
        combo = [(i, adj[col][i]) for i in live if i != zero_row]
        check = MultiPoly.zero(base, nvars)
        for i, coeff in combo:
            check = check + coeff * rec.m[i][col]
        if check != one:
            return False
        for i, coeff in combo:
            if not coeff.is_zero():
                rec.lmul(_root_a(size, zero_row, i), coeff)
        for r in range(size):
            if r != zero_row and not rec.m[r][col].is_zero():
                rec.lmul(_root_a(size, r, zero_row), -rec.m[r][col])
        if zero_row != col:
            rec.lmul(_root_a(size, col, zero_row), one)
            rec.lmul(_root_a(size, zero_row, col), -one)
            rec.lmul(_root_a(size, col, zero_row), one)
        for c2 in range(size):
            if c2 != col and not rec.m[col][c2].is_zero():
                rec.rmul(_root_a(size, col, c2), -rec.m[col][c2])
    return GroupMatrix(rec.rs, rec.m).is_identity()


# ---------------------------------------------------------------------------
# certified local-global pipeline


def _prime_factors(n: int):
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _word_over_field(m: GroupMatrix, var: int, budget: Budget) -> ElemWord:
    """A word over the field base for m: exact Euclid when univariate,
    greedy otherwise."""
    active = [
        v
        for v in range(m.nvars)
        if any(p.degree_in(v) > 0 for row in m.entries for p in row)
    ]
    if len(active) <= 1:
        return factor_univar_euclidean(m, var=active[0] if active else var)
    word, residual = heuristic_reduce(m, budget)
    if residual.is_identity():
        return word
    if residual.is_constant():
        tail = factor_univar_euclidean(residual)
        word = free_reduce(word.concat(tail))
        if eval_word(word, m.base, m.nvars) == m:
            return word
    raise NotFactored("field-base reduction stalled; raise the budget")


def _gauss_local_constant(g: GroupMatrix, p: int, budget: Budget | None = None) -> ElemWord:
    """Factor a constant integer matrix over Z_(p): pivots are p-units,
    arguments are rationals with p-free denominators.  Delegates to the
    monic-localized reduction, where constants are the trivial case."""
    gq = g.map_entries(lambda q: convert(q, Q))
    entries = [[MonicLocElem(q) for q in row] for row in gq.entries]
    word = factor_monic_localized(g.rs, entries, p, budget).to_elem_word(Q)
    if eval_word(word, Q, g.nvars) != gq:
        raise NotFactored("constant local reduction failed verification")
    return word


def _local_prime_word(m: GroupMatrix, p: int, var: int, budget: Budget) -> ElemWord:
    """Word over Q with p-free denominators evaluating to m.

    Route: kill m mod p with a lifted word over F_p, factor the constant
    local part with p-unit pivots, then reduce the congruence remainder
    over the monic localization and descend it."""
    fp = BaseRing.prime_field(p)
    m_p = m.map_entries(lambda q: convert(q, fp))
    if m_p.is_identity():
        w0 = ElemWord.empty(m.rs)
    else:
        w_bar = _word_over_field(m_p, var, budget)
        w0 = ElemWord(m.rs, [(r, lift_mod_to_integers(a)) for r, a in w_bar.letters])
    m1 = m * eval_word(w0, Z, m.nvars).inverse() if len(w0) else m
    zeros = {v: MultiPoly.zero(Z, m.nvars) for v in range(m.nvars)}
    const_part = m1.substitute(zeros, nvars_out=m.nvars)
    if const_part.is_identity():
        w_c = ElemWord.empty(m.rs)
        m2_q = m1.map_entries(lambda q: convert(q, Q))
    else:
        w_c = _gauss_local_constant(const_part, p, budget)
        m2_q = m1.map_entries(lambda q: convert(q, Q)) * eval_word(
            w_c, Q, m.nvars
        ).inverse()
    if m2_q.is_identity():
        core = ElemWord.empty(m.rs)
    else:
        core = None
        w_try, resid = heuristic_reduce(GroupMatrix(m.rs, m2_q.entries), budget)
        if resid.is_identity() and all(
            _is_p_integral(arg, p) for _, arg in w_try.letters
        ):
            core = w_try
        if core is None:
            entries = [[MonicLocElem(q) for q in row] for row in m2_q.entries]
            w_m = factor_monic_localized(m.rs, entries, p, budget, var=var)
            f = MultiPoly.const(Q, m.nvars, 1)
            for _, arg in w_m.letters:
                red = arg.reduce()
                f = f * red.den ** red.power
            core = descend_monic(GroupMatrix(m.rs, m2_q.entries), w_m, f, budget)
            core = shift_word_base(core, Q)
    word = core
    if len(w_c):
        word = word.concat(shift_word_base(w_c, Q))
    if len(w0):
        word = word.concat(shift_word_base(w0, Q))
    word = free_reduce(word)
    m_q = m.map_entries(lambda q: convert(q, Q))
    if eval_word(word, Q, m.nvars) != m_q:
        raise NotFactored("local word failed verification")
    for _, arg in word.letters:
        if not _is_p_integral(arg, p):
            raise NotFactored("local word is not p-integral")
    return word


def _lcm_denominators(word: ElemWord) -> int:
    d = 1
    for _, arg in word.letters:
        lcm = denominator_lcm(arg)
        d = d * lcm // gcd(d, lcm)
    return d


def _certified_variable_pass(m: GroupMatrix, var: int, budget: Budget) -> tuple:
    """One induction step: a word for m * m(var -> 0)^{-1} via coverings."""
    m_q = m.map_entries(lambda p: convert(p, Q))
    w_q = _word_over_field(m_q, var, budget)
    d = _lcm_denominators(w_q)
    if d == 1:
        loc1 = BaseRing.integers_localized(1)
        cert = dilation_factor(m, shift_word_base(w_q, loc1), 1, var=var, budget=budget)
        covering = CoveringData((1,), (1,), (max(cert.k, 1),))
        word = patch(m, [(1, cert)], covering, var=var)
        return word, m.at_zero(var)
    elems = [d]
    loc_d = BaseRing.integers_localized(d)
    certs = [(d, dilation_factor(m, shift_word_base(w_q, loc_d), d, var=var, budget=budget))]
    for p in _prime_factors(d):
        w_p = _local_prime_word(m, p, var, budget)
        t_p = _lcm_denominators(w_p)
        if t_p % p == 0:
            raise NotFactored("local route failed to avoid the prime %d" % p)
        loc_t = BaseRing.integers_localized(max(t_p, 1))
        certs.append(
            (t_p, dilation_factor(m, shift_word_base(w_p, loc_t), t_p, var=var, budget=budget))
        )
        elems.append(t_p)
    exponents = [max(cert.k, 1) for _, cert in certs]
    covering = CoveringData.from_elements(elems, exponents)
    word = patch(m, certs, covering, var=var)
    return word, m.at_zero(var)


def _certified_pipeline(m: GroupMatrix, budget: Budget, var_order=None) -> ElemWord:
    """Per-variable induction; returns a word for m * m(0,...,0)^{-1}."""
    word = ElemWord.empty(m.rs)
    current = m
    for var in var_order if var_order is not None else range(m.nvars):
        if current.is_constant():
            break
        if all(p.degree_in(var) <= 0 for row in current.entries for p in row):
            continue
        try:
            step, current = _certified_variable_pass(current, var, budget)
        except (DescentBudgetExceeded, PreconditionViolated) as exc:
            raise NotFactored("certified pipeline: %s" % exc) from exc
        word = free_reduce(word.concat(step))
        log.debug(
            "induction on x%d: step word %d letters, degree %d",
            var + 1, len(step), step.max_degree(),
        )
    if not current.is_constant():
        raise NotFactored("variables remain after the induction")
    return word


def factor_polynomial(
    g: GroupMatrix,
    budget: Budget | None = None,
    elementary_residual: bool = True,
    var_order=None,
) -> FactorizationCertificate:
    """Factor g in SL_N(Z[x..]) or Sp_2N(Z[x..]) into elementary letters.

    Heuristic reduction first; the certified local-global pipeline is the
    completeness backstop, knocking out variables in var_order (x1 first
    by default).  The residual is the identity by default; with
    elementary_residual=False the constant part g(0,...,0) is returned
    unfactored as the group-of-constants component.
    """
    budget = budget or DEFAULT_BUDGET
    if g.base.kind != "Z":
        raise PreconditionViolated("factorization target must be over Z")
    if not membership_check(g, g.rs):
        raise NotInGroup("matrix fails the group invariant")
    base, nvars = g.base, g.nvars
    zeros = {v: MultiPoly.zero(base, nvars) for v in range(nvars)}

    word, residual = heuristic_reduce(g, budget)
    log.debug(
        "heuristic stage: residual constant=%s, word length %d, max degree %d",
        residual.is_constant(), len(word), word.max_degree(),
    )
    if not residual.is_constant():
        tail = _certified_pipeline(residual, budget, var_order)
        word = free_reduce(word.concat(tail))
        residual = residual.substitute(zeros, nvars_out=nvars)
        log.debug(
            "certified stage: word length %d, max degree %d",
            len(word), word.max_degree(),
        )

    if elementary_residual:
        if not residual.is_identity():
            word = free_reduce(word.concat(factor_integer_constant(residual)))
        residual_constant = GroupMatrix.identity(g.rs, base, nvars)
    else:
        residual_constant = residual

    cert = FactorizationCertificate(
        target=g, word=word, residual_constant=residual_constant, verified=False
    )
    if not cert.check():
        raise NotFactored("assembled certificate failed final verification")
    cert.verified = True
    return cert
