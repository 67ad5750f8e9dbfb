"""Exact base-ring and multivariate polynomial arithmetic.

Everything here is integer/rational arithmetic; there is no floating point
anywhere in the package.  Supported coefficient rings: the integers, the
integers mod m, prime fields, the rationals, and the integers with a single
element s inverted (fractions whose denominators divide a power of s).

Polynomials are sparse maps from exponent tuples to nonzero coefficients,
canonically ordered graded-lexicographically (x1 > x2 > ...) for text
emission.  The text grammar accepted and emitted here is the substrate of
every file format in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    BaseMismatch,
    NotAUnit,
    NotMonic,
    ParseError,
    SearchBoundExceeded,
)

KIND_INTEGERS = "Z"
KIND_MOD = "Zmod"
KIND_PRIME_FIELD = "Fp"
KIND_RATIONALS = "Q"
KIND_LOCALIZED = "Zloc"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class BaseRing:
    """One of the effective coefficient rings.

    kind/param pairs: ("Z", None), ("Zmod", m), ("Fp", p), ("Q", None),
    ("Zloc", s).  Elements are plain ints (Z, Zmod, Fp) or Fractions
    (Q, Zloc); Zloc fractions are kept in lowest terms with denominators
    dividing a power of s, which is a unique normal form.
    """

    kind: str
    param: int | None = None

    @staticmethod
    def integers() -> "BaseRing":
        return BaseRing(KIND_INTEGERS)

    @staticmethod
    def integers_mod(m: int) -> "BaseRing":
        if m < 2:
            raise ValueError("modulus must be at least 2")
        return BaseRing(KIND_MOD, m)

    @staticmethod
    def prime_field(p: int) -> "BaseRing":
        if not _is_prime(p):
            raise ValueError("prime field needs a prime modulus, got %r" % (p,))
        return BaseRing(KIND_PRIME_FIELD, p)

    @staticmethod
    def rationals() -> "BaseRing":
        return BaseRing(KIND_RATIONALS)

    @staticmethod
    def integers_localized(s: int) -> "BaseRing":
        if s == 0:
            raise ValueError("cannot invert zero")
        return BaseRing(KIND_LOCALIZED, abs(s))

    @property
    def modulus(self) -> int | None:
        if self.kind in (KIND_MOD, KIND_PRIME_FIELD):
            return self.param
        return None

    @property
    def is_domain(self) -> bool:
        if self.kind == KIND_MOD:
            return _is_prime(self.param)
        return True

    @property
    def is_field(self) -> bool:
        return self.kind in (KIND_PRIME_FIELD, KIND_RATIONALS)

    def zero(self):
        return Fraction(0) if self.kind in (KIND_RATIONALS, KIND_LOCALIZED) else 0

    def one(self):
        return Fraction(1) if self.kind in (KIND_RATIONALS, KIND_LOCALIZED) else 1

    def from_int(self, n: int):
        m = self.modulus
        if m is not None:
            return n % m
        if self.kind == KIND_INTEGERS:
            return int(n)
        return Fraction(n)

    def from_fraction(self, q: Fraction):
        """Coerce an exact rational into this ring; raises if impossible."""
        q = Fraction(q)
        m = self.modulus
        if m is not None:
            den = q.denominator
            if gcd(den, m) != 1:
                raise BaseMismatch("denominator %d not invertible mod %d" % (den, m))
            return q.numerator * pow(den, -1, m) % m
        if self.kind == KIND_INTEGERS:
            if q.denominator != 1:
                raise BaseMismatch("%s is not an integer" % (q,))
            return q.numerator
        if self.kind == KIND_LOCALIZED:
            self._check_denominator(q.denominator)
        return q

    def _check_denominator(self, den: int) -> None:
        s = self.param
        d = den
        while d > 1:
            g = gcd(d, s)
            if g == 1:
                raise BaseMismatch(
                    "denominator %d has factors outside Z[1/%d]" % (den, s)
                )
            while d % g == 0:
                d //= g
        return None

    def normalize(self, c):
        m = self.modulus
        if m is not None:
            return c % m
        if self.kind == KIND_LOCALIZED:
            c = Fraction(c)
            self._check_denominator(c.denominator)
        return c

    def is_unit(self, c) -> bool:
        c = self.normalize(c)
        if self.kind == KIND_INTEGERS:
            return c in (1, -1)
        if self.kind == KIND_MOD:
            return gcd(c, self.param) == 1
        if self.kind == KIND_PRIME_FIELD:
            return c % self.param != 0
        if self.kind == KIND_RATIONALS:
            return c != 0
        # Zloc: units are +-(divisors of s^k)
        if c == 0:
            return False
        n = abs(Fraction(c).numerator)
        s = self.param
        while n > 1:
            g = gcd(n, s)
            if g == 1:
                return False
            while n % g == 0:
                n //= g
        return True

    def unit_inverse(self, c):
        if not self.is_unit(c):
            raise NotAUnit("%r is not a unit of %s" % (c, self))
        if self.kind == KIND_INTEGERS:
            return c
        if self.kind in (KIND_MOD, KIND_PRIME_FIELD):
            return pow(c % self.param, -1, self.param)
        return Fraction(1) / Fraction(c)

    def exponent_bound(self) -> int:
        """Exact bound for annihilator searches: the exponent of m for Zmod."""
        m = self.modulus
        if m is None:
            return 0
        return max(1, m.bit_length())

    def __str__(self) -> str:
        if self.kind == KIND_INTEGERS:
            return "Z"
        if self.kind == KIND_RATIONALS:
            return "Q"
        if self.kind == KIND_MOD:
            return "Z/%d" % self.param
        if self.kind == KIND_PRIME_FIELD:
            return "F%d" % self.param
        return "Z[1/%d]" % self.param


def base_ring_from_str(text: str) -> BaseRing:
    """Inverse of str(BaseRing); used by all file headers."""
    t = text.strip()
    if t == "Z":
        return BaseRing.integers()
    if t == "Q":
        return BaseRing.rationals()
    if t.startswith("Z/"):
        return BaseRing.integers_mod(int(t[2:]))
    if t.startswith("F"):
        return BaseRing.prime_field(int(t[1:]))
    if t.startswith("Z[1/") and t.endswith("]"):
        return BaseRing.integers_localized(int(t[4:-1]))
    raise ParseError("unknown base ring %r" % (text,))


class MultiPoly:
    """Sparse exact multivariate polynomial over a BaseRing.

    Immutable by contract: never mutate `terms` after construction.
    """

    __slots__ = ("base", "nvars", "terms", "_hash")

    def __init__(self, base: BaseRing, nvars: int, terms: dict, normalized: bool = False):
        self.base = base
        self.nvars = nvars
        if normalized:
            self.terms = terms
        else:
            clean = {}
            for exps, c in terms.items():
                c = base.normalize(c)
                if c != 0:
                    if len(exps) != nvars:
                        raise ValueError("exponent tuple %r has wrong length" % (exps,))
                    clean[tuple(exps)] = c
            self.terms = clean
        self._hash = None

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(base: BaseRing, nvars: int) -> "MultiPoly":
        return MultiPoly(base, nvars, {}, normalized=True)

    @staticmethod
    def const(base: BaseRing, nvars: int, value) -> "MultiPoly":
        c = base.normalize(base.from_int(value) if isinstance(value, int) else value)
        if c == 0:
            return MultiPoly.zero(base, nvars)
        return MultiPoly(base, nvars, {(0,) * nvars: c}, normalized=True)

    @staticmethod
    def variable(base: BaseRing, nvars: int, index: int) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise ValueError("variable index %d out of range" % index)
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return MultiPoly(base, nvars, {exps: base.one()}, normalized=True)

    # -- predicates and views --------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, self.base.zero())

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: int) -> int:
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def coefficients(self):
        return self.terms.values()

    def _check_compatible(self, other: "MultiPoly") -> None:
        if self.base != other.base or self.nvars != other.nvars:
            raise BaseMismatch(
                "operands over %s[%d vars] vs %s[%d vars]"
                % (self.base, self.nvars, other.base, other.nvars)
            )

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_compatible(other)
        m = self.base.modulus
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if m is not None:
                v %= m
            if v:
                out[e] = v
            elif e in out:
                del out[e]
        return MultiPoly(self.base, self.nvars, out, normalized=True)

    def __neg__(self) -> "MultiPoly":
        m = self.base.modulus
        if m is None:
            out = {e: -c for e, c in self.terms.items()}
        else:
            out = {e: (-c) % m for e, c in self.terms.items()}
        return MultiPoly(self.base, self.nvars, out, normalized=True)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_compatible(other)
        if not self.terms or not other.terms:
            return MultiPoly.zero(self.base, self.nvars)
        m = self.base.modulus
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if m is not None:
                    v %= m
                if v:
                    out[e] = v
                elif e in out:
                    del out[e]
        return MultiPoly(self.base, self.nvars, out, normalized=True)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(self.base, self.nvars, 1)
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    def scale(self, c) -> "MultiPoly":
        """Multiply by a base-ring scalar."""
        c = self.base.normalize(c)
        if c == 0:
            return MultiPoly.zero(self.base, self.nvars)
        m = self.base.modulus
        out = {}
        for e, c0 in self.terms.items():
            v = c0 * c
            if m is not None:
                v %= m
            if v:
                out[e] = v
        return MultiPoly(self.base, self.nvars, out, normalized=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (
            self.base == other.base
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (self.base, self.nvars, frozenset(self.terms.items()))
            )
        return self._hash

    def __repr__(self) -> str:
        return "MultiPoly(%s, %s)" % (self.base, self.to_text())

    # -- substitution ------------------------------------------------------

    def substitute(self, assignment: dict, nvars_out: int | None = None) -> "MultiPoly":
        """Ring-homomorphism image under var index -> MultiPoly.

        Unassigned variables map to themselves (the output must have at
        least that many variables).  All images share one base ring.
        """
        base = self.base
        if nvars_out is None:
            nvars_out = max(
                [self.nvars] + [img.nvars for img in assignment.values()]
            )
        images = {}
        for v, img in assignment.items():
            if img.base != base:
                raise BaseMismatch("substitution image over %s, poly over %s" % (img.base, base))
            if img.nvars != nvars_out:
                img = img.extend_vars(nvars_out)
            images[v] = img
        for v in range(self.nvars):
            if v not in images:
                if v >= nvars_out:
                    raise BaseMismatch("variable x%d has no slot in the output ring" % (v + 1,))
                images[v] = MultiPoly.variable(base, nvars_out, v)
        out = MultiPoly.zero(base, nvars_out)
        powers: dict = {}
        for exps, c in self.terms.items():
            term = MultiPoly.const(base, nvars_out, 1)
            for v, e in enumerate(exps):
                if e == 0:
                    continue
                key = (v, e)
                pw = powers.get(key)
                if pw is None:
                    pw = images[v] ** e
                    powers[key] = pw
                term = term * pw
            out = out + term.scale(c)
        return out

    def extend_vars(self, nvars: int) -> "MultiPoly":
        if nvars < self.nvars:
            raise ValueError("extend_vars cannot shrink")
        if nvars == self.nvars:
            return self
        pad = (0,) * (nvars - self.nvars)
        out = {e + pad: c for e, c in self.terms.items()}
        return MultiPoly(self.base, nvars, out, normalized=True)

    def shrink_vars(self, nvars: int) -> "MultiPoly":
        """Drop trailing variables, which must not occur."""
        if nvars > self.nvars:
            raise ValueError("shrink_vars cannot grow")
        out = {}
        for e, c in self.terms.items():
            if any(e[nvars:]):
                raise BaseMismatch("variable beyond x%d still occurs" % nvars)
            out[e[:nvars]] = c
        return MultiPoly(self.base, nvars, out, normalized=True)

    # -- text form -----------------------------------------------------------

    def to_text(self) -> str:
        return emit_poly(self)


def poly_op(kind: str, p: MultiPoly, q: MultiPoly | None = None) -> MultiPoly:
    """Named ring operation: kind in {"add", "mul", "neg"}."""
    if kind == "neg":
        return -p
    if q is None:
        raise ValueError("binary operation %r needs two operands" % kind)
    if kind == "add":
        return p + q
    if kind == "mul":
        return p * q
    raise ValueError("unknown operation %r" % kind)


# ---------------------------------------------------------------------------
# annihilators and localization equality


def annihilator_exponent(base: BaseRing, d, s, bound: int | None = None):
    """Smallest n >= 0 with s^n * d = 0 in the base ring, or None.

    Domains are answered analytically; for Z/m the search bound is the
    exponent of m, which is exact, so None is a definitive answer there.
    A caller-supplied smaller bound raises SearchBoundExceeded when the
    search is inconclusive.
    """
    d = base.normalize(d)
    s = base.normalize(s)
    if d == 0:
        return 0
    m = base.modulus
    if m is None or base.kind == KIND_PRIME_FIELD:
        # domain: s^n * d = 0 forces d = 0 unless s is nilpotent (only s=0)
        if s == 0:
            return 1
        return None
    exact_bound = base.exponent_bound()
    limit = exact_bound if bound is None else bound
    acc = d
    for n in range(limit + 1):
        if acc == 0:
            return n
        acc = (acc * s) % m
    if bound is not None and bound < exact_bound:
        raise SearchBoundExceeded(
            "undecided after %d steps; exact bound is %d" % (bound, exact_bound)
        )
    return None


def localize_eq(a: MultiPoly, b: MultiPoly, s) -> bool:
    """True iff a and b agree after inverting s (coefficientwise check)."""
    a._check_compatible(b)
    diff = a - b
    for c in diff.coefficients():
        if annihilator_exponent(a.base, c, s) is None:
            return False
    return True


def s_valuation(base: BaseRing, c, s: int) -> int | None:
    """Largest v with c / s^v still s-integral (negative when c has
    denominators).  None for c = 0 (infinite valuation)."""
    c = base.normalize(c)
    if c == 0:
        return None
    if s in (1, -1):
        return 0
    s = abs(s)
    q = Fraction(c)
    num, den = abs(q.numerator), q.denominator
    v = 0
    while num % s == 0:
        num //= s
        v += 1
    e = 0
    if den > 1:
        d = den
        while d > 1:
            g = gcd(d, s)
            if g == 1:
                raise BaseMismatch("denominator %d not supported by s=%d" % (den, s))
            while d % g == 0:
                d //= g
        power = 1
        while power % den != 0:
            power *= s
            e += 1
    return v - e


def poly_s_valuation(p: MultiPoly, s: int) -> int | None:
    """Minimum s-valuation over all coefficients; None if p = 0."""
    vals = [s_valuation(p.base, c, s) for c in p.coefficients()]
    vals = [v for v in vals if v is not None]
    if not vals:
        return None
    return min(vals)


def denominator_lcm(p: MultiPoly) -> int:
    """LCM of coefficient denominators (1 for integral polynomials)."""
    out = 1
    for c in p.coefficients():
        d = Fraction(c).denominator
        out = out * d // gcd(out, d)
    return out


# ---------------------------------------------------------------------------
# base changes


def convert(p: MultiPoly, new_base: BaseRing) -> MultiPoly:
    """Exact coefficient conversion; raises BaseMismatch when lossy.

    Supported directions: into Q from anything fraction-valued or Z;
    Z -> Zmod/Fp/Zloc; Q/Zloc -> Z (integrality checked), Q -> Zloc
    (denominators checked), Zloc -> Zloc (checked), Q/Zloc -> Zmod/Fp
    (denominator invertibility checked).
    """
    if p.base == new_base:
        return p
    if p.base.modulus is not None:
        m2 = new_base.modulus
        if m2 is None or p.base.modulus % m2 != 0:
            raise BaseMismatch(
                "no ring map %s -> %s (use lift_mod_to_integers for"
                " representative lifts)" % (p.base, new_base)
            )
    out = {}
    for e, c in p.terms.items():
        out[e] = new_base.from_fraction(Fraction(c))
    return MultiPoly(new_base, p.nvars, out)


def lift_mod_to_integers(p: MultiPoly) -> MultiPoly:
    """Lift Z/m or F_p coefficients to their representatives in 0..m-1."""
    if p.base.modulus is None:
        raise BaseMismatch("lift expects a modular base, got %s" % p.base)
    out = {e: int(c) for e, c in p.terms.items()}
    return MultiPoly(BaseRing.integers(), p.nvars, out)


# ---------------------------------------------------------------------------
# monic division and monic localization


def monic_divrem(g: MultiPoly, f: MultiPoly, var: int = 0):
    """Exact division g = q*f + r with deg_var(r) < deg_var(f).

    f must be monic in the distinguished variable: its leading coefficient
    with respect to var is the constant 1.
    """
    g._check_compatible(f)
    df = f.degree_in(var)
    if df < 0:
        raise NotMonic("zero divisor polynomial")
    lead = _coeff_in_var(f, var, df)
    if not (lead.is_constant() and lead.constant_term() == g.base.one()):
        raise NotMonic("leading coefficient in x%d is not 1" % (var + 1,))
    base, nv = g.base, g.nvars
    q = MultiPoly.zero(base, nv)
    r = g
    while True:
        dr = r.degree_in(var)
        if r.is_zero() or dr < df:
            return q, r
        lead_r = _coeff_in_var(r, var, dr)
        shift = tuple(dr - df if i == var else 0 for i in range(nv))
        mono = MultiPoly(base, nv, {shift: base.one()})
        qt = lead_r * mono
        q = q + qt
        r = r - qt * f


def _coeff_in_var(p: MultiPoly, var: int, deg: int) -> MultiPoly:
    out = {}
    for e, c in p.terms.items():
        if e[var] == deg:
            e2 = tuple(0 if i == var else x for i, x in enumerate(e))
            out[e2] = c
    return MultiPoly(p.base, p.nvars, out)


def as_univariate_in(p: MultiPoly, var: int) -> dict:
    """View as {degree in var: coefficient poly (var-free)}."""
    out: dict = {}
    for e, c in p.terms.items():
        d = e[var]
        e2 = tuple(0 if i == var else x for i, x in enumerate(e))
        coeff = out.get(d)
        if coeff is None:
            out[d] = {e2: c}
        else:
            coeff[e2] = coeff.get(e2, 0) + c
    return {
        d: MultiPoly(p.base, p.nvars, terms)
        for d, terms in out.items()
        if any(p.base.normalize(v) != 0 for v in terms.values())
    }


class MonicLocElem:
    """Element numerator / denom^power of a monic localization.

    denom is monic in the distinguished variable (index 0 by convention).
    Equality is decided by cross-multiplication; arithmetic merges
    denominators into a single monic product at power 1.
    """

    __slots__ = ("num", "den", "power")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None, power: int = 0):
        if power < 0:
            raise ValueError("negative denominator power")
        if den is None or power == 0:
            den = MultiPoly.const(num.base, num.nvars, 1)
            power = 0
        else:
            d = den.degree_in(0)
            lead = _coeff_in_var(den, 0, d) if d >= 0 else None
            if d < 0 or not (lead.is_constant() and lead.constant_term() == num.base.one()):
                raise NotMonic("denominator is not monic in x1")
        self.num = num
        self.den = den
        self.power = power

    @staticmethod
    def from_poly(p: MultiPoly) -> "MonicLocElem":
        return MonicLocElem(p)

    @property
    def base(self) -> BaseRing:
        return self.num.base

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def denominator_poly(self) -> MultiPoly:
        return self.den ** self.power

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_denominator_free(self) -> bool:
        return self.power == 0 or self.den.total_degree() == 0

    def reduce(self) -> "MonicLocElem":
        """Cancel whole powers of the denominator when division is exact."""
        num, power = self.num, self.power
        while power > 0:
            q, r = monic_divrem(num, self.den)
            if not r.is_zero():
                break
            num, power = q, power - 1
        if power == 0:
            return MonicLocElem(num)
        return MonicLocElem(num, self.den, power)

    def __add__(self, other: "MonicLocElem") -> "MonicLocElem":
        a, b = self, other
        if a.power == 0 and b.power == 0:
            return MonicLocElem(a.num + b.num)
        da, db = a.denominator_poly(), b.denominator_poly()
        if a.den == b.den:
            p = max(a.power, b.power)
            num = a.num * a.den ** (p - a.power) + b.num * b.den ** (p - b.power)
            return MonicLocElem(num, a.den, p).reduce()
        return MonicLocElem(a.num * db + b.num * da, da * db, 1).reduce()

    def __neg__(self) -> "MonicLocElem":
        return MonicLocElem(-self.num, self.den, self.power)

    def __sub__(self, other: "MonicLocElem") -> "MonicLocElem":
        return self + (-other)

    def __mul__(self, other: "MonicLocElem") -> "MonicLocElem":
        if self.power == 0 and other.power == 0:
            return MonicLocElem(self.num * other.num)
        da, db = self.denominator_poly(), other.denominator_poly()
        return MonicLocElem(self.num * other.num, da * db, 1).reduce()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonicLocElem):
            return NotImplemented
        return (self.num * other.denominator_poly()) == (
            other.num * self.denominator_poly()
        )

    def __hash__(self):
        r = self.reduce()
        return hash((r.num, r.den, r.power))

    def __repr__(self) -> str:
        if self.power == 0:
            return "MonicLoc(%s)" % self.num.to_text()
        return "MonicLoc((%s) / (%s)^%d)" % (
            self.num.to_text(),
            self.den.to_text(),
            self.power,
        )


# ---------------------------------------------------------------------------
# text grammar: integer (or integer/integer) literals, x1..x9, + - * / ^, parens


def emit_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    if p.nvars > 9:
        raise ParseError("text form supports at most 9 variables")
    items = sorted(p.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
    pieces = []
    for e, c in items:
        mono = "*".join(
            "x%d" % (i + 1) if k == 1 else "x%d^%d" % (i + 1, k)
            for i, k in enumerate(e)
            if k
        )
        neg = c < 0
        ca = -c if neg else c
        if mono and ca == 1:
            body = mono
        elif mono:
            body = "%s*%s" % (_coeff_text(ca), mono)
        else:
            body = _coeff_text(ca)
        if not pieces:
            pieces.append("-" + body if neg else body)
        else:
            pieces.append(("- " if neg else "+ ") + body)
    return " ".join(pieces)


def _coeff_text(c) -> str:
    q = Fraction(c)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.toks: list = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                self.toks.append(("int", int(text[i:j])))
                i = j
            elif ch == "x":
                if i + 1 >= n or text[i + 1] not in "123456789":
                    raise ParseError("bad variable at position %d in %r" % (i, text))
                self.toks.append(("var", int(text[i + 1]) - 1))
                i += 2
            elif ch in "+-*/^()":
                self.toks.append((ch, None))
                i += 1
            else:
                raise ParseError("unexpected character %r in %r" % (ch, text))

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok


def parse_poly(text: str, base: BaseRing, nvars: int) -> MultiPoly:
    """Parse the polynomial grammar over the rationals, then coerce."""
    toks = _Tokens(text)
    p = _parse_expr(toks, nvars)
    if toks.peek()[0] is not None:
        raise ParseError("trailing tokens in %r" % (text,))
    return convert(p, base)


def _parse_expr(toks: _Tokens, nvars: int) -> MultiPoly:
    node = _parse_term(toks, nvars)
    while True:
        kind, _ = toks.peek()
        if kind == "+":
            toks.next()
            node = node + _parse_term(toks, nvars)
        elif kind == "-":
            toks.next()
            node = node - _parse_term(toks, nvars)
        else:
            return node


def _parse_term(toks: _Tokens, nvars: int) -> MultiPoly:
    node = _parse_factor(toks, nvars)
    while True:
        kind, _ = toks.peek()
        if kind == "*":
            toks.next()
            node = node * _parse_factor(toks, nvars)
        elif kind == "/":
            toks.next()
            divisor = _parse_factor(toks, nvars)
            if not divisor.is_constant() or divisor.is_zero():
                raise ParseError("division only by nonzero constants")
            node = node.scale(Fraction(1) / Fraction(divisor.constant_term()))
        else:
            return node


def _parse_factor(toks: _Tokens, nvars: int) -> MultiPoly:
    sign = 1
    while toks.peek()[0] == "-":
        toks.next()
        sign = -sign
    node = _parse_atom(toks, nvars)
    if toks.peek()[0] == "^":
        toks.next()
        kind, val = toks.next()
        if kind != "int":
            raise ParseError("exponent must be an integer literal")
        node = node ** val
    if sign < 0:
        node = -node
    return node


def _parse_atom(toks: _Tokens, nvars: int) -> MultiPoly:
    q = BaseRing.rationals()
    kind, val = toks.next()
    if kind == "int":
        return MultiPoly.const(q, nvars, val)
    if kind == "var":
        if val >= nvars:
            raise ParseError("variable x%d beyond declared nvars=%d" % (val + 1, nvars))
        return MultiPoly.variable(q, nvars, val)
    if kind == "(":
        node = _parse_expr(toks, nvars)
        if toks.next()[0] != ")":
            raise ParseError("unbalanced parentheses")
        return node
    raise ParseError("unexpected token %r" % (kind,))
