from fractions import Fraction

import numpy as np
import pytest

from reference_values import xi0_profile
from twolayer.deformation import deformed_pair
from twolayer.hodograph import (NEWTON, PERTURBATIVE, SIGMA_ZERO, SPACE_FAMILY, TIME_FAMILY,
                                XI_CONSTANT, HodographError, HodographProblem, evolve,
                                hodograph_curves, implicit_residual, initial_condition_arrays,
                                solve_initial_condition, to_layer_variables)
from twolayer.models import FIRST, ZEROTH, ModelParams, hamiltonian
from twolayer.ratpoly import XS, BiPoly

R = 0.05


def test_perturbative_profile_matches_closed_form():
    p = HodographProblem.from_index(3, R, method=PERTURBATIVE, nx=201, times=(0.0,))
    xi0, s0, u0, u1 = initial_condition_arrays(p)
    assert np.max(np.abs(xi0 - xi0_profile(p.x, R))) < 1e-10
    assert np.all(s0 == 0)
    assert np.max(np.abs(u0[0] - np.sqrt((1 - p.x) / 3))) < 1e-12


def test_newton_profile_is_exact_root():
    x = np.linspace(-0.5, 0.5, 11)
    p = HodographProblem.from_index(3, R, nx=11, times=(0.0,))
    xi0, s0, _, _ = initial_condition_arrays(p)
    F = p.density()
    assert np.max(np.abs(F.diff("xi").diff("sigma").compile()(xi0, 0.0) - x)) < 1e-13
    # differs from the linearized profile at second order
    gap = np.max(np.abs(xi0 - xi0_profile(x, R)))
    assert 1e-4 < gap < 10 * R**2


def test_xi_constant_mode():
    x = np.linspace(-0.5, 0.5, 7)
    pp = HodographProblem.from_index(3, R, mode="xi-constant", method=PERTURBATIVE, nx=7,
                                     times=(0.0,))
    xi, s, u0, u1 = initial_condition_arrays(pp)
    assert np.max(np.abs(xi - R)) < 1e-14
    assert np.max(np.abs(s - np.sqrt((1 - x) / 3))) < 1e-13
    pn = HodographProblem.from_index(3, R, mode=XI_CONSTANT, nx=7, times=(0.0,))
    xi, s, _, _ = initial_condition_arrays(pn)
    # exact branch: xi constant with xi = r (1 - 2 xi^2)
    assert np.ptp(xi) < 1e-13
    assert xi[0] == pytest.approx(R * (1 - 2 * xi[0] ** 2), abs=1e-14)
    assert np.max(implicit_residual(pn, x, 0.0, xi, s)) < 1e-12


def test_scalar_initial_condition():
    xi, s = solve_initial_condition(3, SIGMA_ZERO, 0.2, r=R, method=PERTURBATIVE)
    assert xi == pytest.approx(float(xi0_profile(0.2, R)), abs=1e-12) and s == 0
    with pytest.raises(HodographError):
        solve_initial_condition(3, SIGMA_ZERO, 1.5, r=R)
    with pytest.raises(HodographError):
        solve_initial_condition(2, SIGMA_ZERO, 0.0, r=R)


@pytest.mark.parametrize("method", [NEWTON, PERTURBATIVE])
def test_residuals_small_where_solution_exists(method):
    p = HodographProblem.from_index(3, R, method=method, nx=41)
    sol = evolve(p)
    assert sol.max_residual() < 1e-10
    assert sol.valid[0].all()


def test_breakdown_follows_characteristic_from_singular_point():
    p = HodographProblem.from_index(3, R, domain=(-0.5, 0.5), nx=5, times=(0.0, 2.0), dt=0.005)
    sol = evolve(p)
    tb = dict(zip(np.round(sol.x, 3), sol.breakdown_time))
    assert tb[0.5] == pytest.approx(0.98, abs=0.02)
    assert np.isinf(tb[-0.5]) and np.isinf(tb[-0.25])
    # the breakdown front x_b(t) ~ 1 - t/2 - t^2/48 reaches x = 0 near t = 1.87
    assert tb[0.0] == pytest.approx(1.87, abs=0.03)


def _pde_residual(r, method=NEWTON):
    """Centred finite-difference residual of xi_t + (H_s)_x, sigma_t + (H_x)_x."""
    h = dt = 2e-3
    p = HodographProblem.from_index(3, r, method=method, domain=(-0.46, -0.14), nx=161,
                                    times=(0.5 - dt, 0.5, 0.5 + dt), dt=dt)
    sol = evolve(p)
    assert abs(sol.x[1] - sol.x[0] - h) < 1e-12
    H = hamiltonian(ModelParams(r, order=FIRST))
    d = H.derivatives(sol.xi[1], sol.sigma[1])
    xi_t = (sol.xi[2] - sol.xi[0]) / (2 * dt)
    s_t = (sol.sigma[2] - sol.sigma[0]) / (2 * dt)
    res_xi = xi_t[1:-1] + (d["s"][2:] - d["s"][:-2]) / (2 * h)
    res_s = s_t[1:-1] + (d["x"][2:] - d["x"][:-2]) / (2 * h)
    return float(max(np.max(np.abs(res_xi)), np.max(np.abs(res_s))))


def test_solution_satisfies_the_evolution_equations():
    assert _pde_residual(0.0) < 1e-5
    big, small = _pde_residual(0.05), _pde_residual(0.025)
    # F0 + r F1 is conserved only to first order, so the defect is O(r^2)
    assert big < 2e-3
    assert big / small == pytest.approx(4, rel=0.25)


def test_time_family():
    F0, F1 = deformed_pair(3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.8, 0.8, (50, 2))
    for r in (0.02, 0.01):
        F = F0 + F1 * Fraction(r).limit_denominator()
        fam = hodograph_curves(F, hamiltonian(ModelParams(r, order=FIRST)), TIME_FAMILY)
        xi, s = pts.T
        first = 12 * xi * s - r * (12 * s - 12 * xi**2 * s)
        err = np.max(np.abs(fam(xi, s) - first))
        assert err < 60 * r**2
    # opposite sign and half the size of -24 xi sigma + r(24 sigma - 24 xi^2 sigma)
    r = 0.0
    fam = hodograph_curves(F0, hamiltonian(ModelParams(r, order=ZEROTH)), TIME_FAMILY)
    assert fam(0.3, 0.4) == pytest.approx(-0.5 * (-24 * 0.3 * 0.4))


def test_space_family():
    F0, F1 = deformed_pair(3)
    pts = np.random.default_rng(1).uniform(-0.8, 0.8, (50, 2))
    xi, s = pts.T
    errs = []
    for r in (0.02, 0.01):
        F = F0 + F1 * Fraction(r).limit_denominator()
        fam = hodograph_curves(F, hamiltonian(ModelParams(r, order=FIRST)), SPACE_FAMILY)
        first = (-3 * xi**2 * (s**2 + 1) - 3 * s**2 + 1
                 + r * (-2 * xi * (xi**2 * (3 * s**2 + 1) - 3)))
        errs.append(np.max(np.abs(fam(xi, s) - first)))
    assert errs[1] < 1e-2 and errs[0] / errs[1] == pytest.approx(4, rel=0.2)


def test_level_set_points_lie_on_curve():
    F0, _ = deformed_pair(3)
    fam = hodograph_curves(F0, hamiltonian(ModelParams(0, order=ZEROTH)), TIME_FAMILY)
    pts = fam.level_set(0.5, n_xi=21)
    assert len(pts) > 5
    assert np.max(np.abs(fam(pts[:, 0], pts[:, 1]) - 0.5)) < 1e-10


def test_layer_variables():
    ls = to_layer_variables((np.array([0.2]), np.array([0.3])), 0.1)
    w = 0.3 / (1 - 0.02)
    assert ls.w[0] == pytest.approx(w)
    assert ls.u2[0] - ls.u1[0] == pytest.approx(w)
    xi, r = 0.2, 0.1
    # momentum shear with densities 1 -+ r, and zero net volume flux
    assert (1 + r) * ls.u2[0] - (1 - r) * ls.u1[0] == pytest.approx(0.3)
    assert (1 - xi) * ls.u1[0] + (1 + xi) * ls.u2[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(HodographError):
        to_layer_variables((np.array([1.0]), np.array([0.0])), 0.1)


def test_problem_validation():
    F0, F1 = deformed_pair(3)
    H = hamiltonian(ModelParams(R, order=FIRST))
    with pytest.raises(HodographError):
        HodographProblem(F0, F1 * 2, H)
    with pytest.raises(HodographError):
        HodographProblem(F0, F1, H, mode="bogus")
    with pytest.raises(HodographError):
        HodographProblem(F0, F1, H, times=(-1.0,))
    xi, _ = BiPoly.gens(XS)
    with pytest.raises(HodographError):
        HodographProblem(xi**3, F1, H)
