"""Exact bivariate polynomials with rational coefficients."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping

import numpy as np

XS = ("xi", "sigma")
UV = ("u", "v")

Scalar = int | Fraction


def as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {type(c).__name__}")


def _grlex(key: tuple[int, int]) -> tuple[int, int, int]:
    return (key[0] + key[1], key[0], key[1])


class BiPoly:
    """Polynomial in two named variables with Fraction coefficients.

    Instances are immutable. Zero coefficients are never stored, so two
    polynomials are equal exactly when their term dictionaries are.
    """

    __slots__ = ("_terms", "names", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | None = None,
                 names: tuple[str, str] = XS):
        clean: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            c = as_fraction(c)
            if c:
                clean[(int(i), int(j))] = c
        self._terms = clean
        self.names = tuple(names)
        self._hash = None

    # construction

    @classmethod
    def const(cls, c: Scalar, names=XS) -> "BiPoly":
        return cls({(0, 0): c}, names)

    @classmethod
    def var(cls, name: str, names=XS) -> "BiPoly":
        if name not in names:
            raise ValueError(f"unknown variable {name!r} for {names}")
        return cls({(1, 0) if name == names[0] else (0, 1): 1}, names)

    @classmethod
    def gens(cls, names=XS) -> tuple["BiPoly", "BiPoly"]:
        return cls.var(names[0], names), cls.var(names[1], names)

    @classmethod
    def from_json(cls, data: Iterable, names=XS) -> "BiPoly":
        return cls({(i, j): Fraction(n, d) for i, j, n, d in data}, names)

    # inspection

    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex(kv[0]))

    def coeff(self, i: int, j: int) -> Fraction:
        return self._terms.get((i, j), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def total_degree(self) -> int:
        return max((i + j for i, j in self._terms), default=-1)

    def degree(self, var: str) -> int:
        k = self._index(var)
        return max((e[k] for e in self._terms), default=-1)

    def _index(self, var: str) -> int:
        try:
            return self.names.index(var)
        except ValueError:
            raise ValueError(f"unknown variable {var!r} for {self.names}") from None

    # arithmetic

    def _coerce(self, other) -> "BiPoly":
        if isinstance(other, BiPoly):
            if other.names != self.names:
                raise ValueError(f"variable mismatch: {self.names} vs {other.names}")
            return other
        return BiPoly.const(as_fraction(other), self.names)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return BiPoly(out, self.names)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -c for k, c in self._terms.items()}, self.names)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BiPoly):
            try:
                c = as_fraction(other)
            except TypeError:
                return NotImplemented
            return BiPoly({k: v * c for k, v in self._terms.items()}, self.names)
        other = self._coerce(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiPoly(out, self.names)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial divided by zero")
        return self * (1 / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = BiPoly.const(1, self.names)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self.names == other.names and self._terms == other._terms
        try:
            return self._terms == BiPoly.const(as_fraction(other), self.names)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.names, frozenset(self._terms.items())))
        return self._hash

    # calculus and composition

    def diff(self, var: str, order: int = 1) -> "BiPoly":
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        k = self._index(var)
        out = {}
        for e, c in self._terms.items():
            if e[k] < order:
                continue
            f = 1
            for m in range(order):
                f *= e[k] - m
            ne = (e[0] - order, e[1]) if k == 0 else (e[0], e[1] - order)
            out[ne] = c * f
        return BiPoly(out, self.names)

    def substitute(self, mapping: Mapping[str, "BiPoly"]) -> "BiPoly":
        """Compose with polynomials for both variables (a ring homomorphism)."""
        a, b = (mapping[n] for n in self.names)
        if a.names != b.names:
            raise ValueError("substitution polynomials must share variables")
        pa = _powers(a, self.degree(self.names[0]))
        pb = _powers(b, self.degree(self.names[1]))
        out = BiPoly({}, a.names)
        for (i, j), c in self._terms.items():
            out = out + pa[i] * pb[j] * c
        return out

    def rename(self, names) -> "BiPoly":
        return BiPoly(self._terms, tuple(names))

    def __call__(self, x, y):
        """Evaluate; exact for Fraction/int inputs, float otherwise."""
        total = 0
        for (i, j), c in self._terms.items():
            total += c * x ** i * y ** j
        return total

    def compile(self) -> Callable:
        """Vectorised float evaluator f(x, y) built on numpy."""
        rows: dict[int, dict[int, float]] = {}
        for (i, j), c in self._terms.items():
            rows.setdefault(i, {})[j] = float(c)
        table = {i: np.array([row.get(j, 0.0) for j in range(max(row) + 1)][::-1])
                 for i, row in rows.items()}
        top = max(table, default=-1)

        def f(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            acc = np.zeros(np.broadcast(x, y).shape)
            for i in range(top, -1, -1):
                acc = acc * x
                if i in table:
                    acc = acc + np.polyval(table[i], y)
            return acc
        return f

    def divide_exact(self, divisor: "BiPoly") -> "BiPoly":
        """Quotient q with self == q * divisor; raises if the division leaves a remainder."""
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead = max(divisor._terms)
        lc = divisor._terms[lead]
        rem = self
        quot: dict[tuple[int, int], Fraction] = {}
        while not rem.is_zero():
            top = max(rem._terms)
            di, dj = top[0] - lead[0], top[1] - lead[1]
            if di < 0 or dj < 0:
                raise ValueError("polynomial is not divisible")
            c = rem._terms[top] / lc
            quot[(di, dj)] = c
            rem = rem - divisor * BiPoly({(di, dj): c}, self.names)
        return BiPoly(quot, self.names)

    # output

    def to_json(self) -> list[list[int]]:
        return [[i, j, c.numerator, c.denominator] for (i, j), c in self.items()]

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in reversed(self.items()):
            mono = "*".join(
                f"{n}" if e == 1 else f"{n}^{e}"
                for n, e in zip(self.names, (i, j)) if e)
            coef = str(c)
            if mono:
                text = mono if c == 1 else f"-{mono}" if c == -1 else f"{coef}*{mono}"
            else:
                text = coef
            parts.append(text)
        return " + ".join(parts).replace("+ -", "- ")


def _powers(p: BiPoly, n: int) -> list[BiPoly]:
    out = [BiPoly.const(1, p.names)]
    for _ in range(max(n, 0)):
        out.append(out[-1] * p)
    return out


def madelung_map() -> dict[str, BiPoly]:
    """u = (1-xi^2)(1-sigma^2), v = 2 xi sigma."""
    xi, s = BiPoly.gens(XS)
    return {"u": (1 - xi ** 2) * (1 - s ** 2), "v": 2 * xi * s}
