"""Exact algebra: rationals, bivariate polynomials, jets, truncated series."""
from .poly import BiPoly, XS, UV, as_fraction, madelung_map
from .jet import JetExpr, RatJet, D, euler_operator
from .series import (INF, ZERO, LaurentSeries, RadicalPoly, rational_sqrt,
                     sqrt_series, squares_to)

__all__ = [
    "BiPoly", "XS", "UV", "as_fraction", "madelung_map",
    "JetExpr", "RatJet", "D", "euler_operator",
    "INF", "ZERO", "LaurentSeries", "RadicalPoly", "rational_sqrt",
    "sqrt_series", "squares_to",
]
