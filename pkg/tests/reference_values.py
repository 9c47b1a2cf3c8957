"""Reference closed forms, typed by hand as exact polynomials."""
from fractions import Fraction as Q

from twolayer.ratpoly import XS, BiPoly, JetExpr, RatJet

xi, s = BiPoly.gens(XS)

F0 = {
    1: Q(1, 2) * xi * s,
    2: Q(1, 2) * (1 - xi**2) * (1 - s**2),
    3: xi * s * (1 - xi**2) * (1 - s**2),
    4: Q(1, 2) * (1 - xi**2) * (1 - s**2) * (5 * xi**2 * s**2 - s**2 - xi**2 + 1),
    5: xi * s * (1 - xi**2) * (1 - s**2) * (7 * xi**2 * s**2 - 3 * s**2 - 3 * xi**2 + 3),
    6: (1 - xi**2) * (1 - s**2) * (21 * s**4 * xi**4 - 14 * s**4 * xi**2 - 14 * s**2 * xi**4
                                   + s**4 + 16 * xi**2 * s**2 + xi**4 - 2 * s**2 - 2 * xi**2 + 1),
}

F1 = {
    3: Q(1, 2) * s * (4 * s**2 * xi**4 - 6 * s**2 * xi**2 - xi**4 + 2 * s**2 + 6 * xi**2),
    4: Q(1, 10) * xi * (75 * s**4 * xi**4 - 130 * s**4 * xi**2 - 40 * s**2 * xi**4
                        + 55 * s**4 + 140 * s**2 * xi**2 + xi**4 - 100 * s**2 - 30 * xi**2),
    5: Q(1, 2) * s * (56 * s**4 * xi**6 - 110 * s**4 * xi**4 - 45 * s**2 * xi**6
                      + 60 * s**4 * xi**2 + 139 * s**2 * xi**4 + 5 * xi**6 - 6 * s**4
                      - 111 * xi**2 * s**2 - 41 * xi**4 + 17 * s**2 + 51 * xi**2),
    6: Q(1, 35) * xi * (3675 * xi**6 * s**6 - 8085 * s**6 * xi**4 - 3920 * s**4 * xi**6
                        + 5425 * s**6 * xi**2 - 11970 * s**4 * xi**4 + 861 * s**2 * xi**6
                        - 1015 * s**6 - 10780 * s**4 * xi**2 - 4711 * s**2 * xi**4
                        - 16 * xi**6 + 2730 * s**4 + 6055 * xi**2 * s**2 + 322 * xi**4
                        - 2205 * s**2 - 700 * xi**2),
}

# hodograph initial profile for F0_3 + r F1_3 in the sigma = 0 mode
def xi0_profile(x, r):
    import numpy as np
    return np.sqrt(1 - x) / np.sqrt(3) + r / 9 * (x + 8)


# Poisson tensors in (xi, sigma)

def _J(p):
    return JetExpr.from_bipoly(p)


def _rj(num, den):
    return RatJet(num if isinstance(num, JetExpr) else _J(num), den)


_den = 4 * (xi**2 - s**2) ** 2
_skew = _J(s) * JetExpr.deriv(0, XS) - _J(xi) * JetExpr.deriv(1, XS)


def pulled_p0_parts():
    g12 = _rj(2 * xi**2 * s**2 - xi**2 - s**2, 2 * _den)
    sym = [[_rj(xi * s * (1 - xi**2), _den), g12], [g12, _rj(xi * s * (1 - s**2), _den)]]
    zeroth = [[0, _rj(-_J(xi * s) * _skew, _den)], [_rj(_J(xi * s) * _skew, _den), 0]]
    return sym, zeroth


def pulled_p1_parts(sign=1):
    """sign=1 is the printed form (+ in the (1,2) entry, - in (2,1))."""
    g12 = _rj(xi * s * (xi**2 + s**2 - 2), _den)
    sym = [[_rj((1 - xi**2) * (xi**2 + s**2), _den), g12],
           [g12, _rj((1 - s**2) * (xi**2 + s**2), _den)]]
    extra = _J(xi**2 + s**2) * _skew
    zeroth = [[0, _rj(sign * extra, _den)], [_rj(-sign * extra, _den), 0]]
    return sym, zeroth
