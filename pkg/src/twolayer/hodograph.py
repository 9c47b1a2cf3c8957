"""Local solutions by the generalized hodograph method.

For a density F conserved by H, a solution (xi, sigma)(x, t) is defined
implicitly by

    F_xs + t H_xs = x,      F_ss + t H_ss = 0,

i.e. x I = t A + B with A, B the quasilinear matrices of H and F; this is
the sign convention matching xi_t = -(H_s)_x, sigma_t = -(H_x)_x.
With F = F0 + r F1 and H = H0 + r H1 the pair is solved either exactly
(2D Newton on the full system) or order by order in r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .deformation import deformed_pair, verify_first_order
from .models import FIRST, ModelParams, HamiltonianDensity, hamiltonian
from .ratpoly import BiPoly

SIGMA_ZERO = "sigma_zero"
XI_CONSTANT = "xi_constant"
NEWTON = "newton"
PERTURBATIVE = "perturbative"

MODE_ALIASES = {"sigma-zero": SIGMA_ZERO, "xi-constant": XI_CONSTANT,
                SIGMA_ZERO: SIGMA_ZERO, XI_CONSTANT: XI_CONSTANT}

_KEYS = {"xs": (1, 1), "ss": (0, 2), "xx": (2, 0), "xxs": (2, 1), "xss": (1, 2), "sss": (0, 3)}


class HodographError(ValueError):
    pass


class _Compiled:
    """Float evaluators of the F derivatives needed by the implicit system."""

    def __init__(self, F: BiPoly):
        self.f = {k: F.diff("xi", a).diff("sigma", b).compile() for k, (a, b) in _KEYS.items()}

    def __call__(self, xi, s):
        return {k: np.broadcast_to(np.asarray(f(xi, s), float), np.shape(xi)) for k, f in self.f.items()}


@dataclass
class HodographProblem:
    F0: BiPoly
    F1: BiPoly
    H: HamiltonianDensity
    domain: tuple[float, float] = (-0.5, 0.5)
    nx: int = 101
    times: tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0)
    mode: str = SIGMA_ZERO
    method: str = NEWTON
    dt: float = 0.01
    seed: np.ndarray | None = None      # (2, nx) Newton start at t = 0
    index: int | None = None

    def __post_init__(self):
        self.mode = MODE_ALIASES.get(self.mode, self.mode)
        if self.mode not in (SIGMA_ZERO, XI_CONSTANT):
            raise HodographError(f"unknown initial-condition mode {self.mode!r}")
        if self.method not in (NEWTON, PERTURBATIVE):
            raise HodographError(f"unknown method {self.method!r}")
        if any(t < 0 for t in self.times):
            raise HodographError("times must be nonnegative")
        series = self.H.series_form
        ok, _ = verify_first_order(self.F0, self.F1, series[0], series[1])
        if not ok:
            raise HodographError("F0 + r F1 is not conserved to first order in r")

    @classmethod
    def from_index(cls, index: int, r: float, order: str = FIRST, **kw) -> "HodographProblem":
        F0, F1 = deformed_pair(index)
        return cls(F0, F1, hamiltonian(ModelParams(r, order=order)), index=index, **kw)

    @property
    def r(self) -> float:
        return float(self.H.r)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.domain[0], self.domain[1], self.nx)

    def density(self) -> BiPoly:
        r = Fraction(self.r).limit_denominator(10 ** 12)
        return self.F0 + self.F1 * r


# the implicit system

def _system(Fd, Hd, x, t):
    G = np.stack([Fd["xs"] + t * Hd["xs"] - x, Fd["ss"] + t * Hd["ss"]])
    J = np.array([[Fd["xxs"] + t * Hd["xxs"], Fd["xss"] + t * Hd["xss"]],
                  [Fd["xss"] + t * Hd["xss"], Fd["sss"] + t * Hd["sss"]]])
    return G, J


def _solve2(J, b):
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([(J[1, 1] * b[0] - J[0, 1] * b[1]) / det,
                         (J[0, 0] * b[1] - J[1, 0] * b[0]) / det]), det


def _det_scale(J):
    return np.abs(J).reshape(4, -1).max(axis=0) ** 2


def newton(evaluate, u, x, t, tol=1e-13, max_iter=50):
    """Damped vectorized Newton; returns (u, residual, ok, det)."""
    u = u.copy()
    active = np.all(np.isfinite(u), axis=0)
    G, J = evaluate(u, x, t)
    res = np.max(np.abs(G), axis=0)
    for _ in range(max_iter):
        todo = active & (res > tol)
        if not todo.any():
            break
        step, det = _solve2(J, -G)
        lam = np.ones_like(res)
        trial = u + step
        for _ in range(12):
            Gt, Jt = evaluate(trial, x, t)
            rt = np.max(np.abs(Gt), axis=0)
            bad = todo & ~(rt < res) & (lam > 1e-3)
            if not bad.any():
                break
            lam = np.where(bad, lam / 2, lam)
            trial = u + lam * step
        accept = todo & (rt < res)
        u = np.where(accept, trial, u)
        G = np.where(accept, Gt, G)
        J = np.where(accept, Jt, J)
        res = np.where(accept, rt, res)
        stalled = todo & ~accept
        active &= ~stalled
    _, det = _solve2(J, G)
    ok = active & (res <= max(tol, 1e-11)) & np.all(np.isfinite(u), axis=0)
    return u, res, ok, det


@dataclass
class HodographSolution:
    x: np.ndarray
    times: np.ndarray
    xi: np.ndarray                 # shape (len(times), nx)
    sigma: np.ndarray
    residual: np.ndarray           # implicit-system residual at each point
    valid: np.ndarray              # False where the local solution broke down
    breakdown_time: np.ndarray     # first failing continuation time per x (inf if none)
    method: str = NEWTON
    diagnostics: dict = field(default_factory=dict)

    def snapshot(self, t: float):
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12:
            raise KeyError(f"time {t} was not requested")
        return self.x, self.xi[k], self.sigma[k]

    def exists_everywhere(self) -> bool:
        return bool(self.valid.all())

    def max_residual(self) -> float:
        r = self.residual[self.valid]
        return float(r.max()) if r.size else math.nan


class _Evaluators:
    def __init__(self, problem: HodographProblem):
        self.r = problem.r
        self.F0 = _Compiled(problem.F0)
        self.F1 = _Compiled(problem.F1)
        self.H = problem.H
        series = problem.H.series_form
        self.H0 = _Compiled(series[0])
        self.H1 = _Compiled(series[1])

    def full(self, u, x, t):
        a, b = self.F0(u[0], u[1]), self.F1(u[0], u[1])
        Fd = {k: a[k] + self.r * b[k] for k in a}
        Hd = self.H.derivatives(u[0], u[1])
        Hd = {k: np.broadcast_to(np.asarray(Hd[k], float), np.shape(u[0])) for k in _KEYS}
        return _system(Fd, Hd, x, t)

    def order0(self, u, x, t):
        return _system(self.F0(u[0], u[1]), self.H0(u[0], u[1]), x, t)

    def order1(self, u0, u1, t):
        """Solve J0 u1 = -G1 and return (u1, residual of that linear equation)."""
        _, J0 = self.order0(u0, 0.0, t)
        b, h = self.F1(u0[0], u0[1]), self.H1(u0[0], u0[1])
        G1 = np.stack([b["xs"] + t * h["xs"], b["ss"] + t * h["ss"]])
        u1, _ = _solve2(J0, -G1)
        lin = np.einsum("ij...,j...->i...", J0, u1) + G1
        return u1, np.max(np.abs(lin), axis=0)


# initial conditions

def _positive_roots(g, lo=0.0, hi=1.0, n=400):
    grid = np.linspace(lo, hi, n + 1)[1:-1]
    vals = g(grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15))
    return roots


def _pick(roots, previous):
    if not roots:
        return math.nan
    if previous is None or not np.isfinite(previous):
        return min(roots)
    return min(roots, key=lambda z: abs(z - previous))


def _scalar_branch(gfun, xs):
    """Roots in (0, 1) of gfun(z) = x for each x, continuous along the grid."""
    out, prev = [], None
    for x in xs:
        z = _pick(_positive_roots(lambda v: gfun(v) - x), prev)
        out.append(z)
        prev = z
    return np.array(out)


def _check_odd(F: BiPoly):
    if any(j % 2 == 0 for _, j in F.terms):
        raise HodographError("sigma_zero mode needs a density odd in sigma")


def initial_condition_arrays(problem: HodographProblem, x=None):
    """(xi0, sigma0, u0, u1) at t = 0; u0, u1 are the order-0/1 parts (perturbative)."""
    x = problem.x if x is None else np.asarray(x, float)
    ev = _Evaluators(problem)
    r = problem.r
    if problem.seed is not None and problem.method == NEWTON:
        u, _, ok, _ = newton(ev.full, np.asarray(problem.seed, float).reshape(2, -1), x, 0.0)
        if not ok.all():
            raise HodographError("Newton failed from the supplied seed")
        return u[0], u[1], None, None
    if problem.mode == SIGMA_ZERO:
        _check_odd(problem.F0)
        _check_odd(problem.F1)
        f0 = problem.F0.diff("xi").diff("sigma").compile()
        xi00 = _scalar_branch(lambda z: f0(z, 0.0), x)
        u0 = np.stack([xi00, np.zeros_like(x)])
        if problem.method == PERTURBATIVE:
            # only the xi equation is nontrivial: F0_xxs u1 = -F1_xs at sigma = 0
            a, b = ev.F0(u0[0], u0[1]), ev.F1(u0[0], u0[1])
            xi1 = -b["xs"] / a["xxs"]
            u1 = np.stack([xi1, np.zeros_like(x)])
            return u0[0] + r * xi1, u0[1], u0, u1
        fr = (problem.F0 + problem.F1 * Fraction(r).limit_denominator(10 ** 12))
        fr = fr.diff("xi").diff("sigma").compile()
        xi0 = np.array([_newton_1d(lambda z: fr(z, 0.0) - xv, z0)
                        for xv, z0 in zip(x, xi00 + r * _xi1_guess(problem, xi00))])
        return xi0, np.zeros_like(x), None, None

    # xi_constant: the branch of F_ss = 0 through xi = 0 at r = 0
    f0 = problem.F0.diff("xi").diff("sigma").compile()
    s00 = _scalar_branch(lambda z: f0(0.0, z), x)
    u0 = np.stack([np.zeros_like(x), s00])
    G0, _ = ev.order0(u0, x, 0.0)
    if np.max(np.abs(G0)) > 1e-10:
        raise HodographError("xi = 0 is not a zeroth-order branch of F_ss = 0 for this density")
    u1, _ = ev.order1(u0, None, 0.0)
    if problem.method == PERTURBATIVE:
        return u0[0] + r * u1[0], u0[1] + r * u1[1], u0, u1
    u, res, ok, _ = newton(ev.full, u0 + r * u1, x, 0.0)
    if not ok.all():
        raise HodographError("Newton failed for the constant-interface initial condition")
    return u[0], u[1], None, None


def _xi1_guess(problem, xi00):
    a = problem.F0.diff("xi", 2).diff("sigma").compile()(xi00, 0.0)
    b = problem.F1.diff("xi").diff("sigma").compile()(xi00, 0.0)
    return -b / a


def _newton_1d(g, z, tol=1e-15):
    h = 1e-7
    for _ in range(60):
        gz = g(z)
        d = (g(z + h) - g(z - h)) / (2 * h)
        if d == 0:
            raise HodographError("singular Jacobian in the initial-condition solve")
        step = gz / d
        z -= step
        if abs(step) < tol:
            break
    if abs(g(z)) > 1e-12:
        raise HodographError("no real root for the initial condition")
    return z


def solve_initial_condition(F, mode: str, x: float, r: float | None = None,
                            method: str = NEWTON, order: str = FIRST) -> tuple[float, float]:
    """(xi0, sigma0) at a single x for F = (F0, F1) or a deformed index."""
    if isinstance(F, int):
        F0, F1 = deformed_pair(F)
    else:
        F0, F1 = F
    if r is None:
        raise HodographError("r is required")
    problem = HodographProblem(F0, F1, hamiltonian(ModelParams(r, order=order)),
                               domain=(x, x), nx=1, times=(0.0,), mode=mode, method=method)
    xi0, s0, _, _ = initial_condition_arrays(problem, np.array([x]))
    if not np.isfinite(xi0[0]):
        raise HodographError(f"no real root in (-1, 1) at x = {x}")
    return float(xi0[0]), float(s0[0])


# evolution

def evolve(problem: HodographProblem) -> HodographSolution:
    """Solve the implicit system on the x-grid at every requested time.

    Each x-column is continued in t from its t = 0 value with an Euler
    predictor along du/dt = -J^{-1} dG/dt and a Newton corrector.  A column
    whose Newton iteration fails or whose Jacobian becomes singular is
    marked broken from that time on.
    """
    x = problem.x
    times = np.array(sorted(set(float(t) for t in problem.times)))
    ev = _Evaluators(problem)
    xi0, s0, u0, u1 = initial_condition_arrays(problem, x)
    nt = len(times)
    XI = np.full((nt, len(x)), np.nan)
    SG = np.full_like(XI, np.nan)
    RES = np.full_like(XI, np.nan)
    breakdown = np.full(len(x), np.inf)
    min_det = np.full(len(x), np.inf)

    if problem.method == NEWTON:
        u = np.stack([xi0, s0])
        system = ev.full
    else:
        u = u0
        system = ev.order0
    alive = np.all(np.isfinite(u), axis=0)
    breakdown[~alive] = 0.0

    t = 0.0
    k = 0
    while k < nt:
        target = times[k]
        while t < target - 1e-15:
            t_new = min(t + problem.dt, target)
            _, J = system(u, x, t)
            du, _ = _solve2(J, -_dGdt(ev, problem.method, u))
            guess = u + (t_new - t) * du
            guess[:, ~alive] = np.nan
            un, res, ok, det = newton(system, guess, x, t_new)
            rel = np.abs(det) / np.maximum(_det_scale(system(un, x, t_new)[1]), 1e-300)
            ok &= rel > 1e-10
            ok &= np.abs(un[0]) < 1
            newly = alive & ~ok
            breakdown[newly] = t_new
            alive &= ok
            u = np.where(alive, un, np.nan)
            min_det = np.where(alive, np.minimum(min_det, rel), min_det)
            t = t_new
        if problem.method == NEWTON:
            G, _ = system(u, x, t)
            res = np.max(np.abs(G), axis=0)
            XI[k], SG[k], RES[k] = u[0], u[1], res
        else:
            G0, _ = system(u, x, t)
            v1, lin = ev.order1(u, None, t)
            r = problem.r
            XI[k] = u[0] + r * v1[0]
            SG[k] = u[1] + r * v1[1]
            RES[k] = np.maximum(np.max(np.abs(G0), axis=0), lin)
        k += 1

    valid = np.isfinite(XI) & np.isfinite(SG)
    return HodographSolution(x, times, XI, SG, RES, valid, breakdown, problem.method,
                             {"min_relative_det": min_det})


def _dGdt(ev, method, u):
    if method == NEWTON:
        Hd = ev.H.derivatives(u[0], u[1])
    else:
        Hd = ev.H0(u[0], u[1])
    return np.stack([np.asarray(Hd["xs"], float) * np.ones_like(u[0]),
                           np.asarray(Hd["ss"], float) * np.ones_like(u[0])])


def implicit_residual(problem: HodographProblem, x, t, xi, sigma) -> np.ndarray:
    """Residual of the full implicit system at given points (Newton convention)."""
    ev = _Evaluators(problem)
    u = np.stack([np.asarray(xi, float), np.asarray(sigma, float)])
    G, _ = ev.full(u, np.asarray(x, float), t)
    return np.max(np.abs(G), axis=0)


# curve families

@dataclass(frozen=True)
class CurveFamily:
    kind: str
    value: object          # callable (xi, sigma) -> t or x

    def __call__(self, xi, sigma):
        return self.value(xi, sigma)

    def level_set(self, level: float, sigma_range=(-1.0, 1.0), n_xi: int = 201,
                  n_sigma: int = 400, xi_range=(-0.999, 0.999)):
        """Points (xi, sigma) with value = level, found by bracketing in sigma."""
        pts = []
        ss = np.linspace(*sigma_range, n_sigma)
        for xi in np.linspace(*xi_range, n_xi):
            with np.errstate(all="ignore"):
                vals = np.asarray(self.value(np.full_like(ss, xi), ss), float) - level
            for a, b, fa, fb in zip(ss[:-1], ss[1:], vals[:-1], vals[1:]):
                if not (np.isfinite(fa) and np.isfinite(fb)):
                    continue
                if fa == 0:
                    pts.append((xi, a))
                elif fa * fb < 0:
                    g = lambda z: float(self.value(xi, z)) - level
                    z = brentq(g, a, b, xtol=1e-14)
                    if abs(g(z)) < 1e-8:        # sign changes across poles are not roots
                        pts.append((xi, z))
        return np.array(pts).reshape(-1, 2)


TIME_FAMILY = "time_family"
SPACE_FAMILY = "space_family"


def hodograph_curves(F: BiPoly, H: HamiltonianDensity, kind: str) -> CurveFamily:
    """t(xi, sigma) = -F_ss/H_ss or x(xi, sigma) = F_xs - (F_xx/H_xx) H_xs.

    Points where the denominator vanishes evaluate to NaN.
    """
    Fss = F.diff("sigma", 2).compile()
    Fxs = F.diff("xi").diff("sigma").compile()
    Fxx = F.diff("xi", 2).compile()

    def ratio(a, b):
        b = np.asarray(b, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(b == 0, np.nan, a / np.where(b == 0, 1.0, b))

    if kind == TIME_FAMILY:
        def value(xi, s):
            return -ratio(Fss(xi, s), H.derivatives(xi, s)["ss"])
    elif kind == SPACE_FAMILY:
        def value(xi, s):
            d = H.derivatives(xi, s)
            return Fxs(xi, s) - ratio(Fxx(xi, s), d["xx"]) * d["xs"]
    else:
        raise HodographError(f"unknown curve family {kind!r}")
    return CurveFamily(kind, value)


# layer variables

@dataclass(frozen=True)
class LayerState:
    xi: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


def to_layer_variables(state, params: ModelParams | float) -> LayerState:
    """Velocity shear and layer-mean velocities (unit mean density)."""
    r = float(params.r if isinstance(params, ModelParams) else params)
    xi, s = (np.asarray(v, float) for v in state)
    if np.any(np.abs(xi) >= 1):
        raise HodographError("|xi| must be < 1")
    w = s / (1 - r * xi)
    return LayerState(xi, s, w, -0.5 * w * (1 + xi), 0.5 * w * (1 - xi))
