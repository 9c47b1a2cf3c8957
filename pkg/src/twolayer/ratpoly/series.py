"""Truncated Laurent series in the spectral parameter and a one-radical extension."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping

from .poly import BiPoly, as_fraction

INF = "inf"
ZERO = "zero"


class RadicalPoly:
    """Finite sum  sum_m P_m * R^(m/2)  over a fixed radicand R.

    R is an opaque generator: nothing is assumed about it beyond being a
    nonzero polynomial.  Exponents m are integers (odd m are the genuine
    half powers).
    """

    __slots__ = ("parts", "radicand")

    def __init__(self, parts: Mapping[int, BiPoly], radicand: BiPoly):
        self.radicand = radicand
        self.parts = {int(m): p for m, p in parts.items() if not p.is_zero()}

    @classmethod
    def lift(cls, p: BiPoly, radicand: BiPoly) -> "RadicalPoly":
        return cls({0: p}, radicand)

    @property
    def names(self):
        return self.radicand.names

    def _coerce(self, other):
        if isinstance(other, RadicalPoly):
            if other.radicand != self.radicand:
                raise ValueError("different radicands")
            return other
        if isinstance(other, BiPoly):
            return RadicalPoly({0: other}, self.radicand)
        return RadicalPoly({0: BiPoly.const(as_fraction(other), self.names)}, self.radicand)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.parts)
        for m, p in other.parts.items():
            out[m] = out[m] + p if m in out else p
        return RadicalPoly(out, self.radicand)

    __radd__ = __add__

    def __neg__(self):
        return RadicalPoly({m: -p for m, p in self.parts.items()}, self.radicand)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (RadicalPoly, BiPoly)):
            c = as_fraction(other)
            return RadicalPoly({m: p * c for m, p in self.parts.items()}, self.radicand)
        other = self._coerce(other)
        out: dict[int, BiPoly] = {}
        for m1, p1 in self.parts.items():
            for m2, p2 in other.parts.items():
                m = m1 + m2
                out[m] = out[m] + p1 * p2 if m in out else p1 * p2
        return RadicalPoly(out, self.radicand)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        even, odd = self.cleared()
        return even.is_zero() and odd.is_zero()

    def cleared(self, shift: int | None = None) -> tuple[BiPoly, BiPoly]:
        """Multiply by R^shift (shift even, >= -min m) and fold to A + B*sqrt(R)."""
        low = min(self.parts, default=0)
        if shift is None:
            shift = max(0, -low)
            shift += shift % 2
        even = BiPoly({}, self.names)
        odd = BiPoly({}, self.names)
        for m, p in self.parts.items():
            k = m + shift
            if k < 0:
                raise ValueError("shift too small")
            if k % 2:
                odd = odd + p * self.radicand ** ((k - 1) // 2)
            else:
                even = even + p * self.radicand ** (k // 2)
        return even, odd

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("RadicalPoly is not hashable")

    def diff(self, var: str) -> "RadicalPoly":
        dr = self.radicand.diff(var)
        out = RadicalPoly({}, self.radicand)
        for m, p in self.parts.items():
            out = out + RadicalPoly({m: p.diff(var)}, self.radicand)
            if m:
                out = out + RadicalPoly({m - 2: p * dr * Fraction(m, 2)}, self.radicand)
        return out

    def substitute(self, mapping, new_radicand: BiPoly) -> "RadicalPoly":
        """Compose with a polynomial map.

        The image of the old radicand must be k^2 times `new_radicand` for a
        rational k > 0; then R^(m/2) maps to k^m * new_radicand^(m/2).
        """
        image = self.radicand.substitute(mapping)
        ratio = _constant_ratio(image, new_radicand)
        k = rational_sqrt(ratio)
        parts = {m: p.substitute(mapping) * k ** m for m, p in self.parts.items()}
        return RadicalPoly(parts, new_radicand)

    def __call__(self, x, y):
        r = float(self.radicand(x, y))
        return sum(float(p(x, y)) * r ** (m / 2) for m, p in self.parts.items())

    def to_json(self):
        return {"radicand": self.radicand.to_json(),
                "parts": [[m, p.to_json()] for m, p in sorted(self.parts.items())]}

    def __repr__(self):
        return " + ".join(f"({p})*R^({m}/2)" for m, p in sorted(self.parts.items())) or "0"


def rational_sqrt(q) -> Fraction:
    q = as_fraction(q)
    if q < 0:
        raise ValueError(f"{q} has no rational square root")
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n != q.numerator or d * d != q.denominator:
        raise ValueError(f"{q} is not a perfect square")
    return Fraction(n, d)


def _constant_ratio(a: BiPoly, b: BiPoly) -> Fraction:
    if b.is_zero():
        raise ZeroDivisionError("zero radicand")
    k, c = next(iter(b.terms.items()))
    ratio = a.coeff(*k) / c
    if a != b * ratio:
        raise ValueError("radicands are not proportional")
    return ratio


class LaurentSeries:
    """Truncated series in lambda with ring-valued coefficients.

    At INF the series is known for all powers >= -order; at ZERO for all
    powers <= order.  Coefficients beyond that are unknown, not zero.
    """

    __slots__ = ("coeffs", "order", "point")

    def __init__(self, coeffs: Mapping[int, object], order: int, point: str = INF):
        if point not in (INF, ZERO):
            raise ValueError("point must be 'inf' or 'zero'")
        keep = {}
        for k, c in coeffs.items():
            if (point == INF and k < -order) or (point == ZERO and k > order):
                continue
            if not c.is_zero():
                keep[int(k)] = c
        self.coeffs = keep
        self.order = order
        self.point = point

    def __getitem__(self, k: int):
        if (self.point == INF and k < -self.order) or (self.point == ZERO and k > self.order):
            raise IndexError(f"power {k} is beyond the truncation order")
        return self.coeffs.get(k)

    def lead(self) -> int:
        if not self.coeffs:
            return 0
        return max(self.coeffs) if self.point == INF else min(self.coeffs)

    def __add__(self, other: "LaurentSeries"):
        if other.point != self.point:
            raise ValueError("series expanded at different points")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentSeries(out, min(self.order, other.order), self.point)

    def __mul__(self, other: "LaurentSeries"):
        if other.point != self.point:
            raise ValueError("series expanded at different points")
        if self.point == INF:
            order = min(self.order - other.lead(), other.order - self.lead())
        else:
            order = min(self.order + other.lead(), other.order + self.lead())
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        return LaurentSeries(out, order, self.point)

    def scale(self, c) -> "LaurentSeries":
        return LaurentSeries({k: v * c for k, v in self.coeffs.items()}, self.order, self.point)

    def powers(self) -> list[int]:
        return sorted(self.coeffs, reverse=self.point == INF)

    def __repr__(self):
        body = " + ".join(f"({c})*lam^{k}" for k, c in sorted(self.coeffs.items(), reverse=True))
        tail = f"O(lam^{-self.order - 1})" if self.point == INF else f"O(lam^{self.order + 1})"
        return f"{body} + {tail}" if body else tail


def sqrt_series(radicand: Mapping[int, BiPoly], point: str = INF, order: int = 5) -> LaurentSeries:
    """Square root of a*lam^2 + b*lam + c as a truncated series.

    `radicand` maps powers of lam (0, 1, 2) to polynomial coefficients.  At
    infinity `a` must be a rational perfect square and the result holds
    powers lam^1 .. lam^-order.  At zero the constant term c is adjoined as
    an opaque radical and the result holds lam^0 .. lam^order with
    RadicalPoly coefficients.
    """
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    if set(radicand) - {0, 1, 2}:
        raise ValueError("radicand must be at most quadratic in lambda")
    names = next(iter(radicand.values())).names
    zero = BiPoly({}, names)
    a, b, c = (radicand.get(k, zero) for k in (2, 1, 0))

    if point == INF:
        if a.is_zero() or a.total_degree() > 0:
            raise ValueError("leading coefficient must be a nonzero constant")
        a0 = a.coeff(0, 0)
        root = rational_sqrt(a0)
        beta, gamma = b / a0, c / a0
        s = [BiPoly.const(1, names)]
        for k in range(1, order + 2):
            acc = (beta if k == 1 else zero) + (gamma if k == 2 else zero)
            for i in range(1, k):
                acc = acc - s[i] * s[k - i]
            s.append(acc / 2)
        return LaurentSeries({1 - k: s[k] * root for k in range(order + 2)}, order, INF)

    if point == ZERO:
        if c.is_zero():
            raise ValueError("constant term must be nonzero at lambda = 0")
        p = [BiPoly.const(1, names)]
        for k in range(1, order + 1):
            acc = (b if k == 1 else zero) + (a * c if k == 2 else zero)
            for i in range(1, k):
                acc = acc - p[i] * p[k - i]
            p.append(acc / 2)
        return LaurentSeries({k: RadicalPoly({1 - 2 * k: p[k]}, c) for k in range(order + 1)},
                             order, ZERO)

    raise ValueError("point must be 'inf' or 'zero'")


def squares_to(series: LaurentSeries, radicand: Mapping[int, BiPoly]) -> bool:
    """True when series*series equals the radicand at every power it determines."""
    sq = series * series
    powers = range(-sq.order, 3) if sq.point == INF else range(0, sq.order + 1)
    for k in powers:
        got = sq.coeffs.get(k)
        want = radicand.get(k)
        if got is None:
            if want is not None and not want.is_zero():
                return False
            continue
        if want is None:
            if not got.is_zero():
                return False
        elif not (got - want).is_zero():
            return False
    return True
