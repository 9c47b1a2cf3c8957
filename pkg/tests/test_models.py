from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twolayer.models import (BOUSSINESQ, DERIVATIVE_ORDERS, FIRST, FIXED_G, FULL, ZEROTH,
                             ModelParams, SingularPointError, boussinesq_series,
                             characteristic_speeds, flux_polynomials, hamiltonian,
                             is_hyperbolic, quasilinear_matrix)
from twolayer.ratpoly import XS, BiPoly

xi, s = BiPoly.gens(XS)
unit = st.floats(-0.9, 0.9)


def test_series_coefficients():
    H0, H1 = boussinesq_series()[:2]
    assert H0 == Q(1, 4) * ((1 - xi**2) * s**2 + xi**2)
    assert H1 == Q(1, 4) * xi * (1 - xi**2) * s**2


def test_series_matches_closed_form():
    r = Q(1, 10)
    series = boussinesq_series()
    full = hamiltonian(ModelParams(float(r)))
    pts = np.random.default_rng(1).uniform(-0.9, 0.9, (20, 2))
    for x, y in pts:
        partial = sum(float(p(x, y)) * float(r) ** k for k, p in enumerate(series))
        assert partial == pytest.approx(float(full(x, y)), abs=float(r) ** len(series))


@pytest.mark.parametrize("order", [FULL, FIRST, ZEROTH])
@pytest.mark.parametrize("scaling", [BOUSSINESQ, FIXED_G])
def test_derivatives_match_finite_differences(order, scaling):
    H = hamiltonian(ModelParams(0.3, scaling, order))
    h = 1e-4
    x, y = 0.31, -0.42
    d = H.derivatives(x, y)

    def val(key, a, b):
        return float(H(a, b)) if key == "h" else float(H.derivatives(a, b)[key])

    for key, (i, j) in DERIVATIVE_ORDERS.items():
        if key == "h":
            continue
        # differentiate the lower-order quantity once more
        if i > 0:
            lower = next(k for k, o in DERIVATIVE_ORDERS.items() if o == (i - 1, j))
            fd = (val(lower, x + h, y) - val(lower, x - h, y)) / (2 * h)
        else:
            lower = next(k for k, o in DERIVATIVE_ORDERS.items() if o == (i, j - 1))
            fd = (val(lower, x, y + h) - val(lower, x, y - h)) / (2 * h)
        assert float(d[key]) == pytest.approx(fd, abs=1e-7), key


@given(unit, unit)
@settings(max_examples=50, deadline=None)
def test_boussinesq_speeds(x, y):
    H = hamiltonian(ModelParams(0, order=ZEROTH))
    lo, hi = characteristic_speeds(H, x, y)
    S = np.sqrt((1 - x * x) * (1 - y * y))
    assert hi == pytest.approx(-x * y + S / 2, abs=1e-12)
    assert lo == pytest.approx(-x * y - S / 2, abs=1e-12)
    A = quasilinear_matrix(H, (x, y))
    assert np.sort(np.linalg.eigvals(A).real) == pytest.approx([lo, hi], abs=1e-12)


def test_fixed_g_limit_is_elliptic():
    H = hamiltonian(ModelParams(0, FIXED_G))
    assert not np.any(is_hyperbolic(H, np.linspace(-0.9, 0.9, 7), 0.3))
    Hb = hamiltonian(ModelParams(0, BOUSSINESQ))
    assert np.all(is_hyperbolic(Hb, np.linspace(-0.9, 0.9, 7), 0.3))


def test_flux_polynomials_first_order():
    H = hamiltonian(ModelParams(Q(1, 20), order=FIRST))
    fs, fx = flux_polynomials(H)
    P = boussinesq_series()[0] + boussinesq_series()[1] * Q(1, 20)
    assert fs == P.diff("sigma") and fx == P.diff("xi")
    assert fx - boussinesq_series()[0].diff("xi") == Q(1, 20) * Q(1, 4) * (1 - 3 * xi**2) * s**2


def test_full_model_is_not_polynomial():
    with pytest.raises(ValueError):
        hamiltonian(ModelParams(0.1)).polynomial()


def test_invalid_parameters():
    with pytest.raises(ValueError):
        ModelParams(1.0)
    with pytest.raises(ValueError):
        ModelParams(-0.1)
    with pytest.raises(ValueError):
        ModelParams(0.1, scaling="nope")


def test_singular_point():
    H = hamiltonian(ModelParams(0.5))
    with pytest.raises(SingularPointError):
        H.derivatives(2.0, 0.1)
