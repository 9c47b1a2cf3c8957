"""Conserved-density families of the dispersionless NLS system and Poisson tensors.

Densities are produced in Madelung variables (u, v) and mapped to the
two-layer variables through u = (1-xi^2)(1-sigma^2), v = 2 xi sigma.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .models import BOUSSINESQ, HamiltonianDensity
from .ratpoly import (INF, UV, XS, ZERO, BiPoly, JetExpr, RatJet, D,
                      euler_operator, madelung_map, sqrt_series)

POLYNOMIAL = "polynomial"
ALGEBRAIC = "algebraic"
TODA = "toda"
VAR_ALIASES = {"uv": "uv", "xs": "xisigma", "xisigma": "xisigma"}

# factor turning the lambda^(1-j) coefficient of K(lambda) into F0_j
POLY_SCALE = {j: Fraction(1) for j in range(1, 7)}


@dataclass(frozen=True)
class LogDensity:
    """poly + log_coeff * log(log_arg), all polynomials in the same variables."""
    poly: BiPoly
    log_coeff: BiPoly
    log_arg: BiPoly


@dataclass(frozen=True)
class ConservedDensity:
    family: str
    index: int
    density: object
    variables: str = "xisigma"
    deformation_order: int = 0


def casimir_radicand(names=UV) -> dict[int, BiPoly]:
    """Coefficients in lambda of (v - lambda)^2 - 4u, or of its (xi, sigma) image."""
    if names == UV:
        u, v = BiPoly.gens(UV)
        return {2: BiPoly.const(1, UV), 1: -2 * v, 0: v ** 2 - 4 * u}
    xi, s = BiPoly.gens(XS)
    return {2: BiPoly.const(1, XS), 1: -4 * xi * s, 0: 4 * (xi ** 2 + s ** 2 - 1)}


def _variables(variables: str) -> str:
    try:
        return VAR_ALIASES[variables]
    except KeyError:
        raise ValueError(f"unknown variables {variables!r}") from None


def casimir_series(order: int, names=UV):
    """Q(lambda) = -1/4 sqrt(...) expanded at infinity."""
    return sqrt_series(casimir_radicand(names), INF, order).scale(Fraction(-1, 4))


def generate_polynomial_family(n_max: int, variables: str = "xisigma") -> list[ConservedDensity]:
    """Densities K_0 .. K_{n_max-1}; index j is the lambda^(1-j) coefficient of Q + lambda/4."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    variables = _variables(variables)
    Q = casimir_series(n_max, UV)
    cov = madelung_map()
    out = []
    for j in range(1, n_max + 1):
        K = Q[1 - j]
        if variables == "xisigma":
            K = K.substitute(cov) * POLY_SCALE.get(j, 1)
        out.append(ConservedDensity(POLYNOMIAL, j, K, variables))
    return out


def polynomial_density(j: int) -> BiPoly:
    return generate_polynomial_family(j, "xisigma")[-1].density


def generate_algebraic_family(n_max: int, variables: str = "xisigma") -> list[ConservedDensity]:
    """Coefficients of lambda^0 .. lambda^(n_max-1) in the lambda -> 0 expansion of Q.

    Each is a RadicalPoly over v^2 - 4u, or over xi^2 + sigma^2 - 1 in the
    two-layer variables (v^2 - 4u = 4(xi^2 + sigma^2 - 1)).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    variables = _variables(variables)
    series = sqrt_series(casimir_radicand(UV), ZERO, n_max - 1 if n_max > 1 else 1)
    xi, s = BiPoly.gens(XS)
    E = xi ** 2 + s ** 2 - 1
    cov = madelung_map()
    out = []
    for j in range(1, n_max + 1):
        c = series[j - 1] * Fraction(-1, 4)
        if variables == "xisigma":
            c = c.substitute(cov, E)
        out.append(ConservedDensity(ALGEBRAIC, j, c, variables))
    return out


def toda_uv() -> list[JetExpr]:
    u, v = JetExpr.gens(UV)
    L = JetExpr.log_field(UV)
    q = Fraction
    return [
        u * L - u + v ** 2 * q(1, 2),
        v * u + v * u * L + v ** 3 * q(1, 6),
        2 * v ** 2 * u + (v ** 2 * u + u ** 2) * L + v ** 4 * q(1, 12) + u ** 2 * q(1, 2),
        v * (160 * v ** 2 * u + 3 * v ** 4 + 210 * u ** 2) * q(1, 60)
        + v * (60 * v ** 2 * u + 180 * u ** 2) * L * q(1, 60),
    ]


def generate_toda_family(n_max: int, variables: str = "uv") -> list[ConservedDensity]:
    if n_max > 4:
        raise ValueError("Toda densities are available up to index 4")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    variables = _variables(variables)
    out = []
    for j, S in enumerate(toda_uv()[:n_max], start=1):
        if variables == "xisigma":
            S = toda_to_xisigma(S)
        out.append(ConservedDensity(TODA, j, S, variables))
    return out


def toda_to_xisigma(S: JetExpr) -> LogDensity:
    """Split S = A(u,v) + B(u,v) log u and map A, B to (xi, sigma)."""
    plain, logs = {}, {}
    for m, c in S.terms.items():
        if any(m[2:6]) or m[6] > 1:
            raise ValueError("expected a jet-order-0 density linear in log u")
        (logs if m[6] else plain)[(m[0], m[1])] = c
    cov = madelung_map()
    A = BiPoly(plain, UV).substitute(cov)
    B = BiPoly(logs, UV).substitute(cov)
    return LogDensity(A, B, cov["u"])


# conservation and involution

def _rational(r) -> Fraction:
    return Fraction(r).limit_denominator(10 ** 12) if isinstance(r, float) else Fraction(r)


def hessian_numerators(H: HamiltonianDensity | BiPoly) -> tuple[BiPoly, BiPoly]:
    """Polynomials (A, B) proportional to (H_xx, H_ss) with one common positive factor."""
    if isinstance(H, BiPoly):
        return H.diff("xi", 2), H.diff("sigma", 2)
    if H.truncation is not None:
        P = H.polynomial()
        return P.diff("xi", 2), P.diff("sigma", 2)
    r = _rational(H.r)
    xi, s = BiPoly.gens(XS)
    d = 1 - r * xi
    pot = 1 if H.params.scaling == BOUSSINESQ else r
    # 2(1 - r xi)^3 * (H_xx, H_ss)
    return pot * d ** 3 - (1 - r ** 2) * s ** 2, (1 - xi ** 2) * d ** 2


def bracket_residual(F: BiPoly, G: BiPoly) -> BiPoly:
    """F_xx G_ss - G_xx F_ss."""
    return F.diff("xi", 2) * G.diff("sigma", 2) - G.diff("xi", 2) * F.diff("sigma", 2)


def _series_residual(F: Sequence[BiPoly], G: Sequence[BiPoly], upto: int) -> list[BiPoly]:
    out = []
    for k in range(upto + 1):
        acc = BiPoly({}, XS)
        for i in range(k + 1):
            if i < len(F) and k - i < len(G):
                acc = acc + bracket_residual(F[i], G[k - i])
        out.append(acc)
    return out


def _as_series(F) -> list[BiPoly]:
    if isinstance(F, ConservedDensity):
        F = F.density
    if isinstance(F, BiPoly):
        return [F]
    return list(F)


def is_conserved(F, H, order: str = "exact"):
    """Check F_xx H_ss = H_xx F_ss.

    order='exact': F is one BiPoly (or a series summed at the model's r),
    H a HamiltonianDensity or BiPoly.  order='o1': F and H are series
    [X0, X1] in r and the identity is checked through O(r).
    Returns (ok, residual); residual is a BiPoly, or a list per r-order.
    """
    if order == "o1":
        Hs = H.series_form[:2] if isinstance(H, HamiltonianDensity) else _as_series(H)
        res = _series_residual(_as_series(F), Hs, 1)
        return all(p.is_zero() for p in res), res
    if order != "exact":
        raise ValueError("order must be 'exact' or 'o1'")
    Fs = _as_series(F)
    if isinstance(F, ConservedDensity) and F.variables != "xisigma":
        raise ValueError("density must be in (xi, sigma) variables")
    if len(Fs) > 1:
        r = _rational(H.r)
        Fp = sum((f * r ** k for k, f in enumerate(Fs)), BiPoly({}, XS))
    else:
        Fp = Fs[0]
    A, B = hessian_numerators(H)
    res = Fp.diff("xi", 2) * B - A * Fp.diff("sigma", 2)
    return res.is_zero(), res


def conservation_integrand(F: BiPoly, H: BiPoly) -> JetExpr:
    """F_xi (H_sigma)_x + F_sigma (H_xi)_x as a jet expression in (xi, sigma)."""
    Fx = JetExpr.from_bipoly(F.diff("xi"))
    Fs = JetExpr.from_bipoly(F.diff("sigma"))
    return Fx * D(H.diff("sigma")) + Fs * D(H.diff("xi"))


def is_conserved_by_euler(F: BiPoly, H: BiPoly) -> bool:
    e1, e2 = euler_operator(conservation_integrand(F, H))
    return e1.is_zero() and e2.is_zero()


def in_involution(F, G, order: str = "exact") -> bool:
    if order == "exact":
        return bracket_residual(_as_series(F)[0], _as_series(G)[0]).is_zero()
    if order == "o1":
        return all(p.is_zero() for p in _series_residual(_as_series(F), _as_series(G), 1))
    raise ValueError("order must be 'exact' or 'o1'")


def dnls_time_derivative(S: JetExpr) -> JetExpr:
    """d/dt of a density along u_t = -(uv)_x, v_t = -(v v_x + u_x)."""
    u, v = JetExpr.gens(UV)
    ux, vx = JetExpr.deriv(0, UV), JetExpr.deriv(1, UV)
    return S.partial(0) * -(u * vx + v * ux) + S.partial(1) * -(v * vx + ux)


def is_dnls_conserved(S: JetExpr) -> bool:
    e1, e2 = euler_operator(dnls_time_derivative(S))
    return e1.is_zero() and e2.is_zero()


# Poisson operators a d/dx + c

class PoissonOperator:
    """2x2 matrix of first-order operators a^ij d/dx + c^ij.

    A symmetric form g d + d g is stored as a = 2g, c = g_x.
    """

    __slots__ = ("a", "c", "names")

    def __init__(self, a, c, names):
        self.names = tuple(names)
        self.a = [[_ratjet(a[i][j], names) for j in range(2)] for i in range(2)]
        self.c = [[_ratjet(c[i][j], names) for j in range(2)] for i in range(2)]

    @classmethod
    def from_parts(cls, sym=None, plain=None, zeroth=None, names=UV):
        """Build from symmetric parts g (g d + d g), plain parts a (a d) and extra zeroth terms."""
        zero = [[0, 0], [0, 0]]
        sym, plain, zeroth = sym or zero, plain or zero, zeroth or zero
        a = [[None] * 2 for _ in range(2)]
        c = [[None] * 2 for _ in range(2)]
        for i in range(2):
            for j in range(2):
                g = _ratjet(sym[i][j], names)
                a[i][j] = g * 2 + _ratjet(plain[i][j], names)
                c[i][j] = g.total_derivative() + _ratjet(zeroth[i][j], names)
        return cls(a, c, names)

    def apply(self, covector) -> tuple[RatJet, RatJet]:
        f = [_ratjet(x, self.names) for x in covector]
        for x in f:
            if x.num.jet_order() > 0:
                raise ValueError("covector components must be jet-order 0")
        df = [x.total_derivative() for x in f]
        return tuple(sum((self.a[i][j] * df[j] + self.c[i][j] * f[j] for j in range(2)),
                         RatJet(JetExpr({}, self.names)))
                     for i in range(2))

    def skew_defects(self) -> list[RatJet]:
        """Quantities that must vanish for skew-symmetry."""
        out = []
        for i in range(2):
            for j in range(2):
                out.append(self.a[i][j] - self.a[j][i])
                out.append(self.c[i][j] + self.c[j][i] - self.a[i][j].total_derivative())
        return out

    def is_skew(self) -> bool:
        return all(d.is_zero() for d in self.skew_defects())

    def __add__(self, other):
        return PoissonOperator([[self.a[i][j] + other.a[i][j] for j in range(2)] for i in range(2)],
                               [[self.c[i][j] + other.c[i][j] for j in range(2)] for i in range(2)],
                               self.names)

    def scale(self, k):
        return PoissonOperator([[x * k for x in row] for row in self.a],
                               [[x * k for x in row] for row in self.c], self.names)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        return all(self.a[i][j] == other.a[i][j] and self.c[i][j] == other.c[i][j]
                   for i in range(2) for j in range(2))

    def substitute_fields(self, maps: tuple[BiPoly, BiPoly]) -> "PoissonOperator":
        """Express the coefficients through new fields (polynomial coefficients only)."""
        def sub(x: RatJet):
            num = x.num.substitute_fields(maps)
            den = JetExpr.from_bipoly(x.den).substitute_fields(maps).to_bipoly()
            return RatJet(num, den)
        names = maps[0].names
        return PoissonOperator([[sub(x) for x in row] for row in self.a],
                               [[sub(x) for x in row] for row in self.c], names)

    def transform(self, M) -> "PoissonOperator":
        """M P M^T with M = d(new)/d(old) given in the same jet variables as P."""
        M = [[_ratjet(M[i][j], self.names) for j in range(2)] for i in range(2)]
        dM = [[M[i][j].total_derivative() for j in range(2)] for i in range(2)]
        zero = RatJet(JetExpr({}, self.names))
        a = [[zero] * 2 for _ in range(2)]
        c = [[zero] * 2 for _ in range(2)]
        for p in range(2):
            for q in range(2):
                ap, cp = zero, zero
                for i in range(2):
                    for j in range(2):
                        ap = ap + M[p][i] * self.a[i][j] * M[q][j]
                        cp = cp + M[p][i] * self.a[i][j] * dM[q][j] + M[p][i] * self.c[i][j] * M[q][j]
                a[p][q], c[p][q] = ap, cp
        return PoissonOperator(a, c, self.names)


def _ratjet(x, names) -> RatJet:
    if isinstance(x, RatJet):
        return x
    if isinstance(x, (JetExpr, BiPoly)):
        if x.names != tuple(names):
            raise ValueError("field mismatch")
        return RatJet(x)
    return RatJet(JetExpr.const(x, names))


def darboux(names=XS) -> PoissonOperator:
    """-[[0, d], [d, 0]]."""
    return PoissonOperator.from_parts(plain=[[0, -1], [-1, 0]], names=names)


def p0() -> PoissonOperator:
    return PoissonOperator.from_parts(plain=[[0, 1], [1, 0]], names=UV)


def p1() -> PoissonOperator:
    u, v = JetExpr.gens(UV)
    vx = JetExpr.deriv(1, UV)
    # [[u d + d u, v d], [d v, 2 d]];  d v = v d + v_x
    return PoissonOperator.from_parts(sym=[[u, 0], [0, 0]], plain=[[0, v], [v, 2]],
                                      zeroth=[[0, 0], [vx, 0]], names=UV)


def p2() -> PoissonOperator:
    u, v = JetExpr.gens(UV)
    v2x = D(v * v)
    # 12: 2u d + 2 d u + v^2 d ; 21: 2u d + 2 d u + d v^2
    return PoissonOperator.from_parts(sym=[[2 * u * v, 2 * u], [2 * u, 2 * v]],
                                      plain=[[0, v * v], [v * v, 0]],
                                      zeroth=[[0, 0], [v2x, 0]], names=UV)


def madelung_jacobian() -> list[list[BiPoly]]:
    """d(u, v)/d(xi, sigma)."""
    m = madelung_map()
    return [[m["u"].diff("xi"), m["u"].diff("sigma")],
            [m["v"].diff("xi"), m["v"].diff("sigma")]]


def push_to_uv(P: PoissonOperator) -> PoissonOperator:
    """Tensor given in (xi, sigma) written in (u, v) components, coefficients still in (xi, sigma)."""
    return P.transform(madelung_jacobian())


def pull_to_xisigma(P: PoissonOperator) -> PoissonOperator:
    """A (u, v) tensor expressed in (xi, sigma) through the inverse Madelung Jacobian."""
    J = madelung_jacobian()
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    inv = [[RatJet(J[1][1], det), RatJet(-J[0][1], det)],
           [RatJet(-J[1][0], det), RatJet(J[0][0], det)]]
    m = madelung_map()
    return P.substitute_fields((m["u"], m["v"])).transform(inv)


def uv_in_xisigma(P: PoissonOperator) -> PoissonOperator:
    m = madelung_map()
    return P.substitute_fields((m["u"], m["v"]))


def gradient(K: BiPoly) -> tuple[JetExpr, JetExpr]:
    n0, n1 = K.names
    return JetExpr.from_bipoly(K.diff(n0)), JetExpr.from_bipoly(K.diff(n1))


def ladder_defect(P: PoissonOperator, Q: PoissonOperator, K1: BiPoly, K2: BiPoly):
    """P dK1 - Q dK2 as a pair of RatJet."""
    a = P.apply(gradient(K1))
    b = Q.apply(gradient(K2))
    return a[0] - b[0], a[1] - b[1]
