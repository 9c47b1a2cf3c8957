"""Method-of-lines integrator for xi_t = -(H_s)_x, sigma_t = -(H_x)_x.

Two conservative schemes are provided:

* ``central_rk4``: fourth-order central flux
  f_{i+1/2} = (-f_{i-1} + 7 f_i + 7 f_{i+1} - f_{i+2}) / 12 with classical
  RK4 in time and an optional viscous flux nu (u_{i+1} - u_i).
* ``lax_friedrichs``: local Lax-Friedrichs (Rusanov) flux with forward Euler.

Both telescope, so sums of xi and sigma change only through boundary fluxes.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .models import HamiltonianDensity

LAX_FRIEDRICHS = "lax_friedrichs"
CENTRAL_RK4 = "central_rk4"
SCHEMES = (LAX_FRIEDRICHS, CENTRAL_RK4)

PERIODIC = "periodic"
CONSTANT = "constant"
DIRICHLET = "dirichlet"

MAX_CFL = 0.5
NGHOST = 2


class SimulationError(RuntimeError):
    pass


class EllipticRegionError(SimulationError):
    """The state left the hyperbolicity region; carries the offending location."""

    def __init__(self, t: float, x: float, xi: float, sigma: float):
        self.t, self.x, self.xi, self.sigma = t, x, xi, sigma
        super().__init__(f"elliptic region entered at t={t:.6g}, x={x:.6g} "
                         f"(xi={xi:.6g}, sigma={sigma:.6g})")


class CFLError(SimulationError):
    pass


@dataclass(frozen=True)
class Boundary:
    """Ghost-cell rule.

    For DIRICHLET, `values(x_ghost, t, near)` is called once per side with the
    ghost positions and the nearest interior (xi, sigma), both ordered from
    the boundary outward-in.  It returns (xi, sigma) at the ghost points or
    None to fall back to constant extension on that side.
    """
    kind: str = PERIODIC
    values: Callable | None = None

    def __post_init__(self):
        if self.kind not in (PERIODIC, CONSTANT, DIRICHLET):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == DIRICHLET and self.values is None:
            raise ValueError("Dirichlet boundary needs a values callback")


@dataclass(frozen=True)
class GridState:
    x: np.ndarray
    xi: np.ndarray
    sigma: np.ndarray
    t: float = 0.0
    boundary: Boundary = field(default_factory=Boundary)

    def __post_init__(self):
        x = np.asarray(self.x, float)
        if x.ndim != 1 or len(x) < 5:
            raise ValueError("need a 1D grid with at least 5 points")
        d = np.diff(x)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform")
        if np.shape(self.xi) != x.shape or np.shape(self.sigma) != x.shape:
            raise ValueError("field shapes do not match the grid")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @classmethod
    def periodic(cls, n: int, length: float, xi_fn, sigma_fn, x0: float = 0.0):
        x = x0 + length * np.arange(n) / n
        return cls(x, np.asarray(xi_fn(x), float), np.asarray(sigma_fn(x), float))


def characteristic_ghosts(H: HamiltonianDensity, data, near, incoming: int):
    """Ghost values taking the `incoming` (+1/-1) characteristic component from
    `data` and the other component from cubic extrapolation of `near`."""
    xi_n, s_n = (np.asarray(v, float) for v in near)
    if len(xi_n) < 4:
        raise ValueError("cubic extrapolation needs four interior points")
    # Lagrange weights from nodes 0, 1, 2, 3 (inward) to -1, -2
    w = np.array([[4.0, -6.0, 4.0, -1.0], [10.0, -20.0, 15.0, -4.0]])
    xe, se = w @ xi_n[:4], w @ s_n[:4]
    d = H.derivatives(xe, se)
    b, c = np.asarray(d["ss"], float), np.asarray(d["xx"], float)
    if np.any(b * c <= 0):
        raise EllipticRegionError(float("nan"), float("nan"), float(xe[0]), float(se[0]))
    q = np.sqrt(c / b)
    dxi, ds = np.asarray(data[0], float) - xe, np.asarray(data[1], float) - se
    amp = (dxi + incoming * ds / q) / 2
    return xe + amp, se + incoming * q * amp


# fluxes

def _pad(xi: np.ndarray, s: np.ndarray, x: np.ndarray, dx: float, t: float, bc: Boundary):
    g = NGHOST
    if bc.kind == PERIODIC:
        return (np.concatenate([xi[-g:], xi, xi[:g]]),
                np.concatenate([s[-g:], s, s[:g]]))
    if bc.kind == CONSTANT:
        return (np.concatenate([np.full(g, xi[0]), xi, np.full(g, xi[-1])]),
                np.concatenate([np.full(g, s[0]), s, np.full(g, s[-1])]))
    # ghost points and the nearest interior values are both ordered outward-in
    # from the boundary; a callback returning None means constant extension
    k = min(4, len(x))
    left = bc.values(x[0] - dx * np.arange(1, g + 1), t, (xi[:k], s[:k]))
    right = bc.values(x[-1] + dx * np.arange(1, g + 1), t, (xi[::-1][:k], s[::-1][:k]))
    lx, ls = (np.full(g, xi[0]), np.full(g, s[0])) if left is None else left
    rx, rs = (np.full(g, xi[-1]), np.full(g, s[-1])) if right is None else right
    return (np.concatenate([np.asarray(lx, float)[::-1], xi, np.asarray(rx, float)]),
            np.concatenate([np.asarray(ls, float)[::-1], s, np.asarray(rs, float)]))


def _fluxes(H: HamiltonianDensity, xi, s):
    d = H.derivatives(xi, s)
    return np.asarray(d["s"], float), np.asarray(d["x"], float), d


def _speeds(d):
    disc = d["xx"] * d["ss"]
    return np.abs(d["xs"]) + np.sqrt(np.maximum(disc, 0.0)), disc


def max_speed(H: HamiltonianDensity, xi, sigma) -> float:
    d = H.derivatives(xi, sigma)
    return float(np.max(_speeds(d)[0]))


def _check_hyperbolic(disc, state_x, xi, s, t, offset=0):
    bad = ~(disc > 0)
    if bad.any():
        i = int(np.argmax(bad))
        j = min(max(i - offset, 0), len(state_x) - 1)
        raise EllipticRegionError(t, float(state_x[j]), float(xi[i]), float(s[i]))


def _rhs_central(H, x, dx, t, xi, s, bc, viscosity, check):
    xp, sp = _pad(xi, s, x, dx, t, bc)
    f, g, d = _fluxes(H, xp, sp)
    if check:
        _check_hyperbolic(_speeds(d)[1], x, xp, sp, t, NGHOST)
    # interfaces i+1/2 for i = -1 .. n-1 (n+1 of them)
    def face(q):
        return (-q[:-3] + 7 * q[1:-2] + 7 * q[2:-1] - q[3:]) / 12

    F, G = face(f), face(g)
    if viscosity:
        F = F - viscosity * (xp[2:-1] - xp[1:-2])
        G = G - viscosity * (sp[2:-1] - sp[1:-2])
    return -(F[1:] - F[:-1]) / dx, -(G[1:] - G[:-1]) / dx


def _rhs_llf(H, x, dx, t, xi, s, bc, check):
    xp, sp = _pad(xi, s, x, dx, t, bc)
    xp, sp = xp[1:-1], sp[1:-1]
    f, g, d = _fluxes(H, xp, sp)
    a, disc = _speeds(d)
    if check:
        _check_hyperbolic(disc, x, xp, sp, t, 1)
    alpha = np.maximum(a[:-1], a[1:])
    F = 0.5 * (f[:-1] + f[1:]) - 0.5 * alpha * (xp[1:] - xp[:-1])
    G = 0.5 * (g[:-1] + g[1:]) - 0.5 * alpha * (sp[1:] - sp[:-1])
    return -(F[1:] - F[:-1]) / dx, -(G[1:] - G[:-1]) / dx


def step(state: GridState, H: HamiltonianDensity, dt: float, scheme: str = CENTRAL_RK4,
         viscosity: float = 0.0, check_hyperbolic: bool = True) -> GridState:
    """Advance one time step of size dt."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    dx, x, bc, t = state.dx, state.x, state.boundary, state.t
    lam = max_speed(H, state.xi, state.sigma)
    if lam * dt / dx > MAX_CFL + 1e-12:
        raise CFLError(f"CFL number {lam * dt / dx:.4g} exceeds {MAX_CFL}")

    if scheme == LAX_FRIEDRICHS:
        a, b = _rhs_llf(H, x, dx, t, state.xi, state.sigma, bc, check_hyperbolic)
        return replace(state, xi=state.xi + dt * a, sigma=state.sigma + dt * b, t=t + dt)

    def L(tt, u, v):
        return _rhs_central(H, x, dx, tt, u, v, bc, viscosity, check_hyperbolic)

    u, v = state.xi, state.sigma
    k1 = L(t, u, v)
    k2 = L(t + dt / 2, u + dt / 2 * k1[0], v + dt / 2 * k1[1])
    k3 = L(t + dt / 2, u + dt / 2 * k2[0], v + dt / 2 * k2[1])
    k4 = L(t + dt, u + dt * k3[0], v + dt * k3[1])
    un = u + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    vn = v + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    out = replace(state, xi=un, sigma=vn, t=t + dt)
    if check_hyperbolic:
        d = H.derivatives(un, vn)
        _check_hyperbolic(_speeds(d)[1], x, un, vn, t + dt)
    return out


@dataclass
class SimulationResult:
    states: list[GridState]          # stored states, first is the initial one
    steps: int
    final: GridState

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def run(state: GridState, H: HamiltonianDensity, T: float, scheme: str = CENTRAL_RK4,
        cfl: float = 0.4, dt: float | None = None, viscosity: float = 0.0,
        store: str | Sequence[float] = "final", check_hyperbolic: bool = True) -> SimulationResult:
    """Integrate to time T.

    `store` is 'final', 'all' (every step, needed for characteristic tracing)
    or a list of output times, which are hit exactly.
    """
    if not 0 < cfl <= MAX_CFL:
        raise CFLError(f"cfl must be in (0, {MAX_CFL}]")
    if T < state.t:
        raise ValueError("T is before the current time")
    targets = sorted(float(t) for t in store) if not isinstance(store, str) else []
    stored = [state]
    n = 0
    cur = state
    while cur.t < T - 1e-14:
        if dt is None:
            lam = max_speed(H, cur.xi, cur.sigma)
            h = cfl * cur.dx / max(lam, 1e-12)
        else:
            h = dt
        stop = min([T] + [s for s in targets if s > cur.t + 1e-14])
        h = min(h, stop - cur.t)
        cur = step(cur, H, h, scheme, viscosity, check_hyperbolic)
        if abs(cur.t - stop) < 1e-12:
            cur = replace(cur, t=stop)
        n += 1
        if store == "all" or any(abs(cur.t - s) < 1e-12 for s in targets):
            stored.append(cur)
    if store == "final":
        stored.append(cur)
    return SimulationResult(stored, n, cur)


# invariants and drift

def _density_evaluator(F):
    from .conserved import ConservedDensity, LogDensity
    from .ratpoly import BiPoly, RadicalPoly

    if isinstance(F, ConservedDensity):
        F = F.density
    if isinstance(F, BiPoly):
        return F.compile()
    if isinstance(F, LogDensity):
        p, c, a = F.poly.compile(), F.log_coeff.compile(), F.log_arg.compile()
        return lambda xi, s: p(xi, s) + c(xi, s) * np.log(a(xi, s))
    if isinstance(F, RadicalPoly):
        return np.vectorize(lambda xi, s: F(xi, s))
    if callable(F):
        return F
    raise TypeError(f"cannot evaluate density of type {type(F).__name__}")


def integrate(values: np.ndarray, dx: float, periodic: bool) -> float:
    if periodic:
        return float(np.sum(values) * dx)
    return float(np.trapz(values, dx=dx))


@dataclass
class DriftReport:
    times: np.ndarray
    values: dict[str, np.ndarray]

    @property
    def baselines(self) -> dict[str, float]:
        return {k: float(v[0]) for k, v in self.values.items()}

    def drift(self, name: str) -> np.ndarray:
        v = self.values[name]
        return np.abs(v - v[0])

    def max_drift(self, name: str) -> float:
        return float(self.drift(name).max())


def monitor(states: Sequence[GridState], invariants: dict) -> DriftReport:
    """Time series of the integrals of the given densities over the grid."""
    evals = {name: _density_evaluator(F) for name, F in invariants.items()}
    values = {name: [] for name in evals}
    for st in states:
        periodic = st.boundary.kind == PERIODIC
        for name, f in evals.items():
            vals = np.broadcast_to(np.asarray(f(st.xi, st.sigma), float), st.x.shape)
            values[name].append(integrate(vals, st.dx, periodic))
    return DriftReport(np.array([s.t for s in states]), {k: np.array(v) for k, v in values.items()})


# characteristics

def _interp(st: GridState, xq, q):
    if st.boundary.kind == PERIODIC:
        L = st.dx * len(st.x)
        xx = np.append(st.x, st.x[0] + L)
        qq = np.append(q, q[0])
        return np.interp((xq - st.x[0]) % L + st.x[0], xx, qq)
    return np.interp(xq, st.x, q)


def trace_characteristics(states: Sequence[GridState], speed: Callable, invariant: Callable,
                          x0) -> tuple[np.ndarray, np.ndarray]:
    """Follow dx/dt = speed(xi, sigma) through stored states with Heun's method.

    Returns (positions, invariant values), each shaped (len(states), len(x0)).
    """
    xs = np.asarray(x0, float).copy()
    pos, vals = [xs.copy()], []

    def sample(st, xq):
        return _interp(st, xq, st.xi), _interp(st, xq, st.sigma)

    a = sample(states[0], xs)
    vals.append(invariant(*a))
    for s0, s1 in zip(states[:-1], states[1:]):
        h = s1.t - s0.t
        v0 = speed(*sample(s0, xs))
        xp = xs + h * v0
        v1 = speed(*sample(s1, xp))
        xs = xs + h / 2 * (v0 + v1)
        pos.append(xs.copy())
        vals.append(invariant(*sample(s1, xs)))
    return np.array(pos), np.array(vals)


def observed_order(errors: Sequence[float], h: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(errors), 1)[0])
