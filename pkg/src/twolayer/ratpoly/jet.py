"""Differential polynomials in two fields, with optional log(w1) factors.

A monomial is stored as the exponent tuple

    (e1, e2, d1, d2, dd1, dd2, L)

meaning w1^e1 w2^e2 w1_x^d1 w2_x^d2 w1_xx^dd1 w2_xx^dd2 log(w1)^L.
Field exponents may be negative (1/u appears once log u is differentiated);
the others are non-negative.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .poly import BiPoly, UV, XS, as_fraction

NSLOT = 7
_ONE = (0,) * NSLOT


def _key(mono: tuple[int, ...]):
    e1, e2, d1, d2, dd1, dd2, L = mono
    return (e1 + e2, e1, e2, d1 + d2 + dd1 + dd2, d1, d2, dd1, dd2, L)


def _bump(mono, slot, by):
    m = list(mono)
    m[slot] += by
    return tuple(m)


class JetExpr:
    __slots__ = ("_terms", "names")

    def __init__(self, terms: Mapping[tuple, object] | None = None, names=UV):
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != NSLOT:
                raise ValueError("jet monomial needs 7 exponents")
            if min(mono[2:]) < 0:
                raise ValueError(f"negative derivative or log exponent in {mono}")
            c = as_fraction(c)
            if c:
                clean[mono] = clean.get(mono, 0) + c
        self._terms = {k: v for k, v in clean.items() if v}
        self.names = tuple(names)

    # construction

    @classmethod
    def const(cls, c, names=UV):
        return cls({_ONE: c}, names)

    @classmethod
    def field(cls, i: int, names=UV):
        return cls({_bump(_ONE, i, 1): 1}, names)

    @classmethod
    def deriv(cls, i: int, names=UV, order: int = 1):
        if order not in (1, 2):
            raise ValueError("only first and second derivatives are representable")
        return cls({_bump(_ONE, 2 * order + i, 1): 1}, names)

    @classmethod
    def log_field(cls, names=UV):
        return cls({_bump(_ONE, 6, 1): 1}, names)

    @classmethod
    def from_bipoly(cls, p: BiPoly) -> "JetExpr":
        return cls({(i, j, 0, 0, 0, 0, 0): c for (i, j), c in p.terms.items()}, p.names)

    @classmethod
    def gens(cls, names=UV):
        return cls.field(0, names), cls.field(1, names)

    @classmethod
    def from_json(cls, data, names=UV):
        return cls({tuple(t[:NSLOT]): Fraction(t[NSLOT], t[NSLOT + 1]) for t in data}, names)

    # inspection

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _key(kv[0]))

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def jet_order(self) -> int:
        order = 0
        for m in self._terms:
            if m[4] or m[5]:
                return 2
            if m[2] or m[3]:
                order = 1
        return order

    def has_log(self) -> bool:
        return any(m[6] for m in self._terms)

    def to_bipoly(self) -> BiPoly:
        out = {}
        for m, c in self._terms.items():
            if any(m[2:]) or m[0] < 0 or m[1] < 0:
                raise ValueError("expression is not a plain polynomial in the fields")
            out[(m[0], m[1])] = c
        return BiPoly(out, self.names)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, JetExpr):
            if other.names != self.names:
                raise ValueError(f"field mismatch: {self.names} vs {other.names}")
            return other
        if isinstance(other, BiPoly):
            if other.names != self.names:
                raise ValueError(f"field mismatch: {self.names} vs {other.names}")
            return JetExpr.from_bipoly(other)
        return JetExpr.const(as_fraction(other), self.names)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return JetExpr(out, self.names)

    __radd__ = __add__

    def __neg__(self):
        return JetExpr({k: -c for k, c in self._terms.items()}, self.names)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                k = tuple(a + b for a, b in zip(m1, m2))
                out[k] = out.get(k, 0) + c1 * c2
        return JetExpr(out, self.names)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("only non-negative powers")
        out = JetExpr.const(1, self.names)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash((self.names, frozenset(self._terms.items())))

    # differentiation

    def partial(self, slot: int) -> "JetExpr":
        """Partial derivative with respect to the jet coordinate in `slot`.

        Slots 0, 1 are the fields, 2, 3 their first derivatives, 4, 5 the
        second derivatives.  Differentiating in w1 also hits log(w1).
        """
        out: dict[tuple, Fraction] = {}
        for m, c in self._terms.items():
            e = m[slot]
            if e:
                k = _bump(m, slot, -1)
                out[k] = out.get(k, 0) + c * e
            if slot == 0 and m[6]:
                k = _bump(_bump(m, 6, -1), 0, -1)
                out[k] = out.get(k, 0) + c * m[6]
        return JetExpr(out, self.names)

    def total_derivative(self) -> "JetExpr":
        if self.jet_order() > 1:
            raise ValueError("total derivative would need third derivatives")
        result = JetExpr({}, self.names)
        for i in (0, 1):
            result = result + self.partial(i) * JetExpr.deriv(i, self.names)
            result = result + self.partial(2 + i) * JetExpr.deriv(i, self.names, 2)
        return result

    def substitute_fields(self, maps: tuple[BiPoly, BiPoly]) -> "JetExpr":
        """Replace both fields by polynomials in new fields, derivatives by the chain rule."""
        names = maps[0].names
        new = [JetExpr.from_bipoly(p) for p in maps]
        firsts = [p.total_derivative() for p in new]
        seconds = [f.total_derivative() for f in firsts]
        pieces = new + firsts + seconds
        out = JetExpr({}, names)
        for m, c in self._terms.items():
            if m[0] < 0 or m[1] < 0 or m[6]:
                raise ValueError("only log-free polynomial expressions can be substituted")
            term = JetExpr.const(c, names)
            for slot in range(6):
                if m[slot]:
                    term = term * pieces[slot] ** m[slot]
            out = out + term
        return out

    def __call__(self, w1, w2, w1x=0, w2x=0, w1xx=0, w2xx=0):
        import math
        total = 0.0
        vals = (w1, w2, w1x, w2x, w1xx, w2xx)
        for m, c in self._terms.items():
            t = float(c)
            for v, e in zip(vals, m[:6]):
                if e:
                    t *= v ** e
            if m[6]:
                t *= math.log(w1) ** m[6]
            total += t
        return total

    def to_json(self):
        return [list(m) + [c.numerator, c.denominator] for m, c in self.items()]

    def __repr__(self):
        if not self._terms:
            return "0"
        a, b = self.names
        symbols = (a, b, f"{a}_x", f"{b}_x", f"{a}_xx", f"{b}_xx", f"log({a})")
        parts = []
        for m, c in reversed(self.items()):
            mono = "*".join(s if e == 1 else f"{s}^{e}" for s, e in zip(symbols, m) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def D(e) -> JetExpr:
    """Total x-derivative; BiPoly arguments are lifted first."""
    if isinstance(e, BiPoly):
        e = JetExpr.from_bipoly(e)
    return e.total_derivative()


def euler_operator(e: JetExpr) -> tuple[JetExpr, JetExpr]:
    """Variational derivatives (E_w1 e, E_w2 e) of a jet-order <= 1 expression."""
    if e.jet_order() > 1:
        raise ValueError("euler_operator accepts jet order <= 1 only")
    return tuple(e.partial(i) - e.partial(2 + i).total_derivative() for i in (0, 1))


class RatJet:
    """Quotient of a JetExpr by a nonzero field polynomial.

    No cancellation is attempted; equality is decided by cross-multiplying.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den: BiPoly | None = None):
        if isinstance(num, BiPoly):
            num = JetExpr.from_bipoly(num)
        if den is None:
            den = BiPoly.const(1, num.names)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.names != num.names:
            raise ValueError("numerator and denominator use different fields")
        self.num = num
        self.den = den

    @property
    def names(self):
        return self.num.names

    def _coerce(self, other):
        if isinstance(other, RatJet):
            return other
        if isinstance(other, (JetExpr, BiPoly)):
            return RatJet(other)
        return RatJet(JetExpr.const(as_fraction(other), self.names))

    def __add__(self, other):
        other = self._coerce(other)
        if self.den == other.den:
            return RatJet(self.num + other.num, self.den)
        return RatJet(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatJet(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        return RatJet(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def total_derivative(self) -> "RatJet":
        dden = JetExpr.from_bipoly(self.den).total_derivative()
        num = self.num.total_derivative() * self.den - self.num * dden
        return RatJet(num, self.den * self.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        other = self._coerce(other)
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        raise TypeError("RatJet is not hashable; equality is up to cross-multiplication")

    def __repr__(self):
        return f"({self.num}) / ({self.den})"


__all__ = ["JetExpr", "RatJet", "D", "euler_operator", "XS", "UV"]
