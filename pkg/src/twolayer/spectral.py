"""Hyperbolicity region, simple waves, sonic tangents and Riemann invariants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .models import BOUSSINESQ, FIXED_G, FULL, ModelParams, hamiltonian

BOUSSINESQ_UNITS = "boussinesq_units"
FIXED_G_UNITS = "fixed_g_units"


def sigma_boundary(xi, params: ModelParams):
    """Upper edge sigma_b(xi) of the region |sigma| < sigma_b."""
    r = float(params.r)
    xi = np.asarray(xi, dtype=float)
    sb = np.sqrt((1 - r * xi) ** 3 / (1 - r * r))
    return sb * math.sqrt(r) if params.scaling == FIXED_G else sb


def area_closed_form(r: float, scaling: str = BOUSSINESQ) -> float:
    """4((1+r)^{5/2} - (1-r)^{5/2}) / (5 r sqrt(1-r^2)), computed without cancellation."""
    if not 0 <= r < 1:
        raise ValueError("r must lie in [0, 1)")
    if r == 0:
        area = 4.0
    else:
        diff = (1 - r) ** 2.5 * math.expm1(5 * math.atanh(r))
        area = 4 * diff / (5 * r * math.sqrt(1 - r * r))
    return area * math.sqrt(r) if scaling == FIXED_G else area


@dataclass(frozen=True)
class HyperbolicityReport:
    r: float
    boundary: Callable
    area: float
    units: str
    area_quadrature: float


def hyperbolic_boundary(params: ModelParams) -> HyperbolicityReport:
    r = float(params.r)
    if not 0 <= r < 1:
        raise ValueError("r must lie in [0, 1)")

    def boundary(xi):
        return sigma_boundary(xi, params)

    quadrature, _ = quad(lambda x: 2 * float(boundary(x)), -1, 1, epsabs=1e-14, epsrel=1e-13)
    units = FIXED_G_UNITS if params.scaling == FIXED_G else BOUSSINESQ_UNITS
    return HyperbolicityReport(r, boundary, area_closed_form(r, params.scaling), units, quadrature)


def boundary_samples(params: ModelParams, n: int = 201):
    xi = np.linspace(-1, 1, n)
    return xi, sigma_boundary(xi, params)


# simple waves

@dataclass(frozen=True)
class SimpleWave:
    xi: np.ndarray
    sigma: np.ndarray
    termination: str          # 'sigma_boundary', 'xi_boundary' or 'elliptic_start'
    end_slope: float          # dsigma/dxi at the last point (inf at |xi| = 1)


def _check_inside(start, params):
    xi, s = start
    if not (-1 < xi < 1) or abs(s) >= float(sigma_boundary(xi, params)):
        raise ValueError(f"start {start} is outside the hyperbolic region")


def simple_wave_curve(start, params: ModelParams, direction: int = 1,
                      xi_direction: int = 1, rtol: float = 1e-10,
                      atol: float = 1e-12) -> SimpleWave:
    """Integrate dsigma/dxi = direction * sqrt(H_xx / H_ss) from `start`.

    The curve is parametrized by theta with xi = sin(theta), which removes the
    vertical tangency at |xi| = 1: dsigma/dtheta = sqrt(2 (1 - r xi) H_xx).
    Integration runs toward xi = xi_direction and stops at the sonic line.
    """
    _check_inside(start, params)
    H = hamiltonian(ModelParams(params.r, params.scaling, FULL))
    r = float(params.r)
    th0 = math.asin(start[0])
    th1 = math.copysign(math.pi / 2, xi_direction)

    def rate(th, y):
        xi = math.sin(th)
        hxx = float(H.derivatives(xi, y[0])["xx"])
        return [direction * math.sqrt(max(0.0, 2 * (1 - r * xi) * hxx))]

    def hit_boundary(th, y):
        return float(sigma_boundary(math.sin(th), params)) - abs(y[0]) - 1e-13
    hit_boundary.terminal = True
    hit_boundary.direction = -1

    sol = solve_ivp(rate, (th0, th1), [start[1]], method="RK45", rtol=rtol, atol=atol,
                    events=hit_boundary, dense_output=False, max_step=0.01)
    if sol.status < 0:
        raise RuntimeError(f"simple-wave integration failed: {sol.message}")
    th = sol.t
    xi, s = np.sin(th), sol.y[0]
    if sol.status == 1:
        termination = "sigma_boundary"
        end_slope = 0.0
    else:
        termination = "xi_boundary"
        end_slope = math.inf
    return SimpleWave(xi, s, termination, end_slope)


def simple_wave_r0(start, theta):
    """Closed form at r = 0: arcsin(sigma) - theta is constant (upper family)."""
    return np.sin(np.clip(math.asin(start[1]) + (np.asarray(theta) - math.asin(start[0])),
                          -math.pi / 2, math.pi / 2))


def simple_wave_slope(xi, sigma, params: ModelParams, direction: int = 1):
    H = hamiltonian(ModelParams(params.r, params.scaling, FULL))
    d = H.derivatives(xi, sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        return direction * np.sqrt(np.maximum(d["xx"], 0) / d["ss"])


# sonic line

def sonic_tangent(xi: float, params: ModelParams, g_tilde: float = 0.5, h: float = 1.0):
    """Sonic-line tangent as (shear component, displacement component) in dimensional units."""
    r = float(params.r)
    if not -1 < xi < 1:
        raise ValueError("|xi| must be < 1")
    return np.array([-3 * r * math.sqrt(g_tilde * (h - xi * r)), math.sqrt(2 * (1 - r * r))])


def sonic_direction(xi: float, params: ModelParams, branch: int = 1):
    """(dxi, dsigma) along sigma = branch * sigma_b(xi), nondimensional, unnormalized."""
    r = float(params.r)
    return np.array([2 * math.sqrt(1 - r * r), -branch * 3 * r * math.sqrt(1 - r * xi)])


# Riemann invariants

def _artanh_tan_half(phi):
    t = np.tan(np.asarray(phi, dtype=float) / 2)
    if np.any(np.abs(t) >= 1 - 1e-12):
        raise ValueError("phi too close to +-pi/2")
    return 0.5 * np.log((1 + t) / (1 - t))


@dataclass(frozen=True)
class RiemannData:
    """Characteristic data in (xi, sigma) = (sin theta, sin phi).

    sign = +1 selects the family travelling with lambda+ = -xi sigma + S/2,
    S = sqrt((1-xi^2)(1-sigma^2)); its zeroth-order invariant is cos(phi + theta).
    """
    r: float

    @staticmethod
    def R0(theta, phi, sign):
        return np.cos(phi + sign * theta)

    @staticmethod
    def R1(theta, phi, sign):
        phi = np.asarray(phi, dtype=float)
        return (1.5 * np.sin(theta) * np.tan(phi)
                + 3 * np.sin(theta + sign * phi) * _artanh_tan_half(phi)
                - sign * 2.5 * np.cos(theta))

    def angle_invariant(self, theta, phi, sign):
        """phi + sign*theta + r R1: a Riemann invariant through O(r)."""
        return phi + sign * theta + self.r * self.R1(theta, phi, sign)

    def cos_invariant(self, theta, phi, sign):
        """cos form of the same invariant, cos(phi + sign*theta) - r sin(...) R1."""
        a = phi + sign * theta
        return np.cos(a) - self.r * np.sin(a) * self.R1(theta, phi, sign)

    @staticmethod
    def lambda0(theta, phi, sign):
        return 0.5 * (-2 * np.sin(theta) * np.sin(phi) + sign * np.cos(theta) * np.cos(phi))

    @staticmethod
    def lambda1(theta, phi, sign):
        return 0.25 * ((3 * np.cos(2 * theta) - 1) * np.sin(phi)
                       + sign * np.sin(theta) * (1 - 3 * np.tan(phi) ** 2)
                       * np.cos(theta) * np.cos(phi))

    @staticmethod
    def lambda1_two(theta, phi, sign):
        """The variant with (1 - 2 tan^2 phi); kept for comparison only."""
        return 0.25 * ((3 * np.cos(2 * theta) - 1) * np.sin(phi)
                       + sign * np.sin(theta) * (1 - 2 * np.tan(phi) ** 2)
                       * np.cos(theta) * np.cos(phi))

    def speed(self, theta, phi, sign):
        return self.lambda0(theta, phi, sign) + self.r * self.lambda1(theta, phi, sign)

    # r = 0 forms in (xi, sigma)

    @staticmethod
    def R_xs(xi, sigma, sign):
        return np.sqrt((1 - xi ** 2) * (1 - sigma ** 2)) - sign * xi * sigma

    @staticmethod
    def lambda_xs(xi, sigma, sign):
        return -xi * sigma + sign * 0.5 * np.sqrt((1 - xi ** 2) * (1 - sigma ** 2))

    @staticmethod
    def lambda_display(xi, sigma, sign):
        """xi sigma +- S/2: eigenvalues of the time-reversed quasilinear matrix."""
        return xi * sigma + sign * 0.5 * np.sqrt((1 - xi ** 2) * (1 - sigma ** 2))


def riemann_invariants(params: ModelParams) -> RiemannData:
    return RiemannData(float(params.r))
