"""Hamiltonian densities, fluxes and quasilinear matrices in (xi, sigma).

All quantities are nondimensional.  The equations of motion are

    xi_t = -(H_sigma)_x,    sigma_t = -(H_xi)_x

and in quasilinear form u_t + A(u) u_x = 0 with A = [[H_xs, H_ss], [H_xx, H_xs]].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .ratpoly import XS, BiPoly

BOUSSINESQ = "boussinesq"
FIXED_G = "fixed_g"
FULL = "full"
FIRST = "first_order_r"
ZEROTH = "zeroth_order"

ORDER_ALIASES = {"full": FULL, "o1": FIRST, "o0": ZEROTH,
                 FIRST: FIRST, ZEROTH: ZEROTH}
SCALING_ALIASES = {"boussinesq": BOUSSINESQ, "fixed-g": FIXED_G, FIXED_G: FIXED_G}


class SingularPointError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    r: float | Fraction = 0
    scaling: str = BOUSSINESQ
    order: str = FULL

    def __post_init__(self):
        if not 0 <= self.r < 1:
            raise ValueError(f"r must lie in [0, 1), got {self.r}")
        object.__setattr__(self, "scaling", SCALING_ALIASES.get(self.scaling, self.scaling))
        object.__setattr__(self, "order", ORDER_ALIASES.get(self.order, self.order))
        if self.scaling not in (BOUSSINESQ, FIXED_G):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.order not in (FULL, FIRST, ZEROTH):
            raise ValueError(f"unknown order {self.order!r}")


DERIVATIVE_ORDERS = {"h": (0, 0), "x": (1, 0), "s": (0, 1), "xx": (2, 0), "ss": (0, 2),
                     "xs": (1, 1), "xxx": (3, 0), "xxs": (2, 1), "xss": (1, 2), "sss": (0, 3)}


def _gens():
    return BiPoly.gens(XS)


def boussinesq_series() -> list[BiPoly]:
    """[H0, H1, H2, H3] of the r-expansion of the Boussinesq-units Hamiltonian."""
    xi, s = _gens()
    base = (1 - xi ** 2) * s ** 2 / 4
    # (1 - r xi)^-1 = sum r^k xi^k
    terms = [base * xi ** k for k in range(4)]
    terms[0] = terms[0] + xi ** 2 / 4
    return terms


def fixed_g_series() -> list[BiPoly]:
    xi, s = _gens()
    base = (1 - xi ** 2) * s ** 2 / 4
    terms = [base * xi ** k for k in range(4)]
    terms[1] = terms[1] + xi ** 2 / 4
    return terms


@dataclass(frozen=True)
class HamiltonianDensity:
    """A Hamiltonian H(xi, sigma; r) together with its r-series.

    `series_form` lists the exact polynomial coefficients H0, H1, ... .
    `truncation` is the number of series terms that define the model
    (None for the closed-form model).
    """
    params: ModelParams
    series_form: list[BiPoly]
    truncation: int | None
    exact_form: Callable = field(repr=False)
    _derivs: Callable = field(repr=False)

    @property
    def r(self):
        return self.params.r

    def polynomial(self) -> BiPoly:
        """The model Hamiltonian as an exact polynomial (truncated models only)."""
        if self.truncation is None:
            raise ValueError("the full model is not polynomial")
        r = self.params.r
        if isinstance(r, float):
            r = Fraction(r).limit_denominator(10 ** 12)
        out = BiPoly({}, XS)
        for k in range(self.truncation):
            out = out + self.series_form[k] * r ** k
        return out

    def __call__(self, xi, sigma):
        return self.exact_form(xi, sigma)

    def derivatives(self, xi, sigma) -> dict[str, np.ndarray]:
        """Float values of the first, second and third partial derivatives.

        Keys name the differentiation variables: 'x', 's', 'xx', 'xs', 'ss',
        'xxx', 'xxs', 'xss', 'sss'.
        """
        return self._derivs(np.asarray(xi, float), np.asarray(sigma, float))


def _series_model(params: ModelParams, series: list[BiPoly], n: int) -> HamiltonianDensity:
    r = float(params.r)
    evals = {key: [series[k].diff("xi", a).diff("sigma", b).compile() for k in range(n)]
             for key, (a, b) in DERIVATIVE_ORDERS.items()}

    def comb(key, xi, s):
        return sum(f(xi, s) * r ** k for k, f in enumerate(evals[key]))

    def derivs(xi, s):
        return {k: comb(k, xi, s) for k in DERIVATIVE_ORDERS if k != "h"}

    return HamiltonianDensity(params, series, n, lambda xi, s: comb("h", xi, s), derivs)


def _full_model(params: ModelParams, series: list[BiPoly]) -> HamiltonianDensity:
    r = float(params.r)
    pot = 1.0 if params.scaling == BOUSSINESQ else r

    def check(xi):
        if r and np.any(np.isclose(np.asarray(xi, float) * r, 1.0)):
            raise SingularPointError("singular point xi = 1/r")

    def exact(xi, s):
        check(xi)
        return 0.25 * ((1 - xi ** 2) * s ** 2 / (1 - r * xi) + pot * xi ** 2)

    def derivs(xi, s):
        check(xi)
        d = 1 - r * xi
        # g(xi) = (1 - xi^2)/(1 - r xi) and its derivatives
        g = (1 - xi ** 2) / d
        g1 = (-2 * xi + r * xi ** 2 + r) / d ** 2
        g2 = -2 * (1 - r ** 2) / d ** 3
        g3 = -6 * r * (1 - r ** 2) / d ** 4
        return {"x": 0.25 * s ** 2 * g1 + 0.5 * pot * xi,
                "s": 0.5 * g * s,
                "xx": 0.25 * s ** 2 * g2 + 0.5 * pot,
                "ss": 0.5 * g,
                "xs": 0.5 * s * g1,
                "xxx": 0.25 * s ** 2 * g3,
                "xxs": 0.5 * s * g2,
                "xss": 0.5 * g1,
                "sss": 0.0 * s}

    return HamiltonianDensity(params, series, None, exact, derivs)


def hamiltonian(params: ModelParams) -> HamiltonianDensity:
    """Select the Hamiltonian for the given inertia parameter, scaling and order.

    Boussinesq units:  H = 1/4((1-xi^2) sigma^2/(1-r xi) + xi^2).
    Fixed-g units:     H = 1/4((1-xi^2) sigma^2/(1-r xi) + r xi^2); its r -> 0
    limit keeps only the kinetic term and is elliptic.
    """
    series = boussinesq_series() if params.scaling == BOUSSINESQ else fixed_g_series()
    if params.order == FULL:
        return _full_model(params, series)
    return _series_model(params, series, 2 if params.order == FIRST else 1)


def rhs_flux(H: HamiltonianDensity) -> tuple[Callable, Callable]:
    """Flux functions (H_sigma, H_xi) so that (xi, sigma)_t = -d/dx of them."""
    return (lambda xi, s: H.derivatives(xi, s)["s"],
            lambda xi, s: H.derivatives(xi, s)["x"])


def flux_polynomials(H: HamiltonianDensity) -> tuple[BiPoly, BiPoly]:
    """Exact flux pair for truncated models with rational r."""
    P = H.polynomial()
    return P.diff("sigma"), P.diff("xi")


def quasilinear_matrix(H: HamiltonianDensity, point) -> np.ndarray:
    xi, s = point
    d = H.derivatives(xi, s)
    return np.array([[d["xs"], d["ss"]], [d["xx"], d["xs"]]], dtype=float)


def characteristic_speeds(H: HamiltonianDensity, xi, s):
    """Eigenvalues (lambda-, lambda+) of A; NaN where the system is elliptic."""
    d = H.derivatives(xi, s)
    disc = d["xx"] * d["ss"]
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    return d["xs"] - root, d["xs"] + root


def is_hyperbolic(H: HamiltonianDensity, xi, s):
    d = H.derivatives(xi, s)
    return d["xx"] * d["ss"] > 0
