import numpy as np
import pytest

from studies import riemann_drift, smooth_periodic_state
from twolayer.conserved import generate_algebraic_family, polynomial_density
from twolayer.models import FIRST, FIXED_G, ZEROTH, ModelParams, hamiltonian
from twolayer.simulator import (CENTRAL_RK4, CONSTANT, DIRICHLET, LAX_FRIEDRICHS, Boundary,
                                CFLError, EllipticRegionError, GridState, characteristic_ghosts,
                                max_speed, monitor, observed_order, run, step)

H0 = hamiltonian(ModelParams(0, order=ZEROTH))
H1 = hamiltonian(ModelParams(0.05, order=FIRST))


@pytest.mark.parametrize("scheme", [CENTRAL_RK4, LAX_FRIEDRICHS])
@pytest.mark.parametrize("kind", ["periodic", CONSTANT])
def test_constant_state_preserved(scheme, kind):
    x = np.linspace(0, 1, 40, endpoint=False)
    st = GridState(x, np.full(40, 0.3), np.full(40, -0.2), boundary=Boundary(kind))
    out = run(st, H1, 0.3, scheme=scheme).final
    assert np.all(out.xi == 0.3) and np.all(out.sigma == -0.2)


def _self_order(scheme, ns, T=0.1):
    finals = [run(smooth_periodic_state(n), H1, T, scheme=scheme, cfl=0.4).final for n in ns]
    diffs = []
    for a, b in zip(finals[:-1], finals[1:]):
        diffs.append(max(np.max(np.abs(a.xi - b.xi[::2])), np.max(np.abs(a.sigma - b.sigma[::2]))))
    return observed_order(diffs, [1 / n for n in ns[:-1]])


def test_central_scheme_fourth_order():
    assert _self_order(CENTRAL_RK4, (50, 100, 200, 400)) == pytest.approx(4, abs=0.4)


def test_lax_friedrichs_first_order():
    assert _self_order(LAX_FRIEDRICHS, (100, 200, 400, 800)) == pytest.approx(1, abs=0.25)


@pytest.mark.parametrize("scheme", [CENTRAL_RK4, LAX_FRIEDRICHS])
def test_casimirs_conserved_on_periodic_grid(scheme):
    res = run(smooth_periodic_state(100), H1, 0.3, scheme=scheme, store="all")
    rep = monitor(res.states, {"xi": lambda a, b: a, "sigma": lambda a, b: b})
    assert rep.max_drift("xi") < 1e-14 and rep.max_drift("sigma") < 1e-14


def test_hamiltonian_drift_converges():
    drifts = []
    for n in (50, 100):
        res = run(smooth_periodic_state(n), H0, 0.3, store="all")
        rep = monitor(res.states, {"H": H0.exact_form, "F4": polynomial_density(4)})
        drifts.append(rep.max_drift("H") + rep.max_drift("F4"))
    assert drifts[1] < 1e-6 and drifts[1] < drifts[0] / 8


def test_algebraic_density_drift_is_discretization_error():
    # the radicand xi^2 + sigma^2 - 1 is positive on this state
    def state(n):
        return GridState.periodic(n, 1.0, lambda x: 0.8 + 0.05 * np.sin(2 * np.pi * x),
                                  lambda x: 0.75 + 0.05 * np.cos(2 * np.pi * x))
    F = generate_algebraic_family(3)[2].density
    drifts = []
    for n in (40, 80):
        res = run(state(n), H0, 0.2, store=[0.1, 0.2])
        drifts.append(monitor(res.states, {"F": F}).max_drift("F"))
    assert drifts[1] < 1e-5 and drifts[1] < drifts[0] / 8


def test_cfl_limit():
    st = smooth_periodic_state(50)
    dt = 0.6 * st.dx / max_speed(H1, st.xi, st.sigma)
    with pytest.raises(CFLError):
        step(st, H1, dt)
    with pytest.raises(CFLError):
        run(st, H1, 0.1, cfl=0.7)


def test_elliptic_state_detected():
    H = hamiltonian(ModelParams(0.01, FIXED_G))
    st = GridState.periodic(50, 1.0, lambda x: 0.1 * np.sin(2 * np.pi * x),
                            lambda x: 0.5 + 0 * x)
    with pytest.raises(EllipticRegionError) as err:
        run(st, H, 0.1)
    assert np.isfinite(err.value.x)


def test_output_times_are_hit_exactly():
    res = run(smooth_periodic_state(50), H1, 0.2, store=[0.05, 0.1, 0.2])
    assert list(res.times) == [0.0, 0.05, 0.1, 0.2]


def test_grid_validation():
    with pytest.raises(ValueError):
        GridState(np.array([0, 1, 3, 4, 5.0]), np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        GridState(np.linspace(0, 1, 6), np.zeros(5), np.zeros(6))
    with pytest.raises(ValueError):
        Boundary(DIRICHLET)


def test_characteristic_ghosts():
    near = (np.array([0.3, 0.31, 0.32, 0.33]), np.array([0.1, 0.12, 0.14, 0.16]))
    ext = characteristic_ghosts(H0, (np.array([0.29, 0.28]), np.array([0.08, 0.06])), near, 1)
    # linear data are reproduced when the imposed data agree with the extrapolation
    assert ext[0] == pytest.approx([0.29, 0.28]) and ext[1] == pytest.approx([0.08, 0.06])
    # only the incoming combination is taken from the data
    data = (np.array([0.5, 0.5]), np.array([0.08, 0.06]))
    gx, gs = characteristic_ghosts(H0, data, near, 1)
    xe, se = np.array([0.29, 0.28]), np.array([0.08, 0.06])
    d = H0.derivatives(xe, se)
    q = np.sqrt(d["xx"] / d["ss"])
    # the correction lies along the right eigenvector (1, q)
    assert np.max(np.abs((gx - xe) * q - (gs - se))) < 1e-12
    assert np.all(gx > xe)


def test_dirichlet_callback_fallback():
    x = np.linspace(0, 1, 30)
    st = GridState(x, np.full(30, 0.2), np.zeros(30),
                   boundary=Boundary(DIRICHLET, lambda xq, t, near: None))
    out = run(st, H1, 0.1).final
    assert np.allclose(out.xi, 0.2) and np.allclose(out.sigma, 0.0)


def test_riemann_invariants_transported():
    right = [riemann_drift(n, 1) for n in (100, 200)]
    assert right[1] < right[0] / 1.8
    wrong = [riemann_drift(n, 1, speed_sign=-1) for n in (100, 200)]
    assert min(wrong) > 10 * right[1]
    assert wrong[1] > 0.8 * wrong[0]


def test_observed_order():
    h = np.array([0.1, 0.05, 0.025])
    assert observed_order(3 * h**2, h) == pytest.approx(2)
