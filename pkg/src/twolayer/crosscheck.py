"""Simulator runs started from hodograph data and compared against it.

The hodograph initial profile for the odd densities is real only for x < 1,
and its local solution breaks down along the characteristic leaving x = 1.
The simulated interval therefore ends short of x = 1 with a constant
extension on the right, feeds hodograph values in through the incoming
characteristic on the left, and the comparison is made on a window outside the domain of
influence of the right end by the final time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .hodograph import HodographError, HodographProblem, evolve
from .models import FIRST
from .simulator import (CENTRAL_RK4, DIRICHLET, NGHOST, Boundary, GridState,
                        characteristic_ghosts, observed_order, run)

DEFAULT_DOMAIN = (-1.36, 0.9)
DEFAULT_WINDOW = (-0.95, -0.6)


def hodograph_left_boundary(problem_kw: dict, x_left: float, dx: float, T: float,
                            H, dt: float = 0.005):
    """Left-boundary callback feeding the hodograph solution in through the
    incoming characteristic only.

    The hodograph data solve the evolution equations only up to O(r^2);
    imposing all of it would leave a grid-scale jump at the boundary.
    """
    xg = x_left - dx * np.arange(1, NGHOST + 1)
    times = np.linspace(0.0, T, max(int(round(T / dt)), 1) + 1)
    p = HodographProblem.from_index(**problem_kw, domain=(xg[-1], xg[0]), nx=NGHOST,
                                    times=tuple(times))
    sol = evolve(p)
    if not sol.valid.all():
        raise HodographError("hodograph boundary data broke down before the final time")
    # evolve orders points left to right; ghosts are ordered outward
    cx = CubicSpline(times, sol.xi[:, ::-1], axis=0)
    cs = CubicSpline(times, sol.sigma[:, ::-1], axis=0)

    def values(xq, t, near):
        if xq[0] >= x_left:
            return None
        return characteristic_ghosts(H, (cx(t), cs(t)), near, incoming=1)
    return values


@dataclass(frozen=True)
class CrossCheck:
    r: float
    n: int
    dx: float
    err_xi: float
    err_sigma: float
    steps: int
    final: GridState

    @property
    def error(self) -> float:
        return max(self.err_xi, self.err_sigma)


def cross_validate(index: int = 3, r: float = 0.05, n: int = 421, T: float = 2.0,
                   domain=DEFAULT_DOMAIN, window=DEFAULT_WINDOW, mode: str = "sigma_zero",
                   order: str = FIRST, cfl: float = 0.4, viscosity: float = 0.0) -> CrossCheck:
    kw = dict(index=index, r=r, order=order, mode=mode)
    p = HodographProblem.from_index(**kw, domain=domain, nx=n, times=(0.0, T))
    hodo = evolve(p)
    x = hodo.x
    m = (x >= window[0]) & (x <= window[1])
    if not hodo.valid[1][m].all():
        raise HodographError("hodograph solution is not defined on the whole comparison window")
    dx = float(x[1] - x[0])
    bc = Boundary(DIRICHLET, hodograph_left_boundary(kw, x[0], dx, T, p.H))
    state = GridState(x, hodo.xi[0], hodo.sigma[0], boundary=bc)
    res = run(state, p.H, T, scheme=CENTRAL_RK4, cfl=cfl, viscosity=viscosity)
    fin = res.final
    return CrossCheck(r, n, dx, float(np.max(np.abs(fin.xi[m] - hodo.xi[1][m]))),
                      float(np.max(np.abs(fin.sigma[m] - hodo.sigma[1][m]))), res.steps, fin)


def refinement_study(r: float, ns=(114, 227, 453), **kw):
    """Errors against the hodograph and the self-convergence order at fixed r.

    Grid sizes must satisfy n_{k+1} - 1 = 2 (n_k - 1) so that coarse points
    are a subset of fine points.
    """
    checks = [cross_validate(r=r, n=n, **kw) for n in ns]
    hs = [c.dx for c in checks]
    errors = [c.error for c in checks]
    window = kw.get("window", DEFAULT_WINDOW)
    diffs = []
    for a, b in zip(checks[:-1], checks[1:]):
        k = (len(b.final.x) - 1) // (len(a.final.x) - 1)
        m = (a.final.x >= window[0]) & (a.final.x <= window[1])
        d = max(np.max(np.abs(a.final.xi - b.final.xi[::k])[m]),
                np.max(np.abs(a.final.sigma - b.final.sigma[::k])[m]))
        diffs.append(float(d))
    self_order = observed_order(diffs, hs[:-1]) if len(diffs) > 1 else float("nan")
    return {"h": hs, "errors": errors, "error_order": observed_order(errors, hs),
            "differences": diffs, "self_order": self_order}


def floor_study(rs=(0.02, 0.04, 0.08), n: int = 453, **kw):
    """Error floor against r at a fixed fine grid; returns errors and log-log slope."""
    errors = [cross_validate(r=r, n=n, **kw).error for r in rs]
    return {"r": list(rs), "errors": errors, "slope": observed_order(errors, rs)}
