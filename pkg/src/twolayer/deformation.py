"""First-order r-deformations of the polynomial conserved densities.

F0 + r F1 is conserved for H0 + r H1 up to O(r^2) when

    box F1 = 2 (H1_xx F0_ss - F0_xx H1_ss),   box = (1-xi^2) d_xx - (1-sigma^2) d_ss.

For H1 = 1/4 xi (1-xi^2) sigma^2 the right side is
-xi(1-xi^2) F0_xx - 3 xi sigma^2 F0_ss.  box preserves the parity classes
R_N (xi odd, sigma even) and S_N (xi even, sigma odd), is upper triangular
in a degree-ordered monomial basis, and has a one-dimensional kernel
spanned by xi (resp. sigma).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .conserved import POLYNOMIAL, ConservedDensity, bracket_residual, polynomial_density
from .models import boussinesq_series
from .ratpoly import XS, BiPoly

R_KIND = "R_N"
S_KIND = "S_N"


class SolvabilityError(ValueError):
    """The right-hand side has a component along the cokernel of box."""


def _order_key(e):
    return (e[0] + e[1], e[0], e[1])


@dataclass(frozen=True)
class MonomialSubspace:
    kind: str
    N: int

    @property
    def basis(self) -> list[tuple[int, int]]:
        if self.kind == R_KIND:
            exps = [(2 * k + 1, 2 * j) for k in range(self.N + 1) for j in range(self.N + 1)]
        elif self.kind == S_KIND:
            exps = [(2 * k, 2 * j + 1) for k in range(self.N + 1) for j in range(self.N)]
        else:
            raise ValueError(f"unknown subspace kind {self.kind!r}")
        return sorted(exps, key=_order_key)

    def contains(self, p: BiPoly) -> bool:
        members = set(self.basis)
        return all(e in members for e in p.terms)

    def kernel_exponent(self) -> tuple[int, int]:
        return (1, 0) if self.kind == R_KIND else (0, 1)


def box(p: BiPoly) -> BiPoly:
    return (1 - _xi() ** 2) * p.diff("xi", 2) - (1 - _sigma() ** 2) * p.diff("sigma", 2)


def _xi():
    return BiPoly.var("xi", XS)


def _sigma():
    return BiPoly.var("sigma", XS)


def _box_column(a: int, b: int) -> dict[tuple[int, int], Fraction]:
    col: dict[tuple[int, int], Fraction] = {}

    def add(e, c):
        if c:
            col[e] = col.get(e, 0) + Fraction(c)
    add((a - 2, b), a * (a - 1))
    add((a, b - 2), -b * (b - 1))
    add((a, b), b * (b - 1) - a * (a - 1))
    return {e: c for e, c in col.items() if c}


def diagonal_formula(kind: str, k: int, j: int) -> int:
    """Closed form of the diagonal entry for the basis monomial indexed (k, j)."""
    if kind == R_KIND:
        return 2 * (j + k) * (2 * j - 1 - 2 * k)
    return 2 * (j + k) * (2 * j + 1 - 2 * k)


@dataclass(frozen=True)
class BoxOperatorMatrix:
    space: MonomialSubspace
    matrix: list[list[Fraction]]

    @property
    def diagonal(self) -> list[Fraction]:
        return [self.matrix[i][i] for i in range(len(self.matrix))]

    def is_upper_triangular(self) -> bool:
        n = len(self.matrix)
        return all(self.matrix[i][j] == 0 for i in range(n) for j in range(i))

    def kernel_dimension(self) -> int:
        n = len(self.matrix)
        zeros = [i for i in range(n) if self.matrix[i][i] == 0]
        # columns with a nonzero pivot on a triangular matrix are independent;
        # if every zero-pivot column vanishes, the nullity is exactly their count
        if self.is_upper_triangular() and all(
                self.matrix[r][i] == 0 for i in zeros for r in range(n)):
            return len(zeros)
        return n - _rank(self.matrix)


def build_box(space: MonomialSubspace) -> BoxOperatorMatrix:
    if space.N < 1:
        raise ValueError("N must be >= 1")
    basis = space.basis
    index = {e: i for i, e in enumerate(basis)}
    n = len(basis)
    M = [[Fraction(0)] * n for _ in range(n)]
    for col, (a, b) in enumerate(basis):
        for e, c in _box_column(a, b).items():
            M[index[e]][col] = c
    out = BoxOperatorMatrix(space, M)
    assert out.is_upper_triangular()
    return out


def _rank(M) -> int:
    rows = [list(r) for r in M]
    rank, ncol = 0, len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][c]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / p
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def default_h1() -> BiPoly:
    return boussinesq_series()[1]


def deformation_rhs(F0: BiPoly, H1: BiPoly | None = None) -> BiPoly:
    H1 = default_h1() if H1 is None else H1
    return 2 * (H1.diff("xi", 2) * F0.diff("sigma", 2) - F0.diff("xi", 2) * H1.diff("sigma", 2))


def enclosing_subspace(p: BiPoly) -> MonomialSubspace:
    kinds = {(i % 2, j % 2) for i, j in p.terms}
    if kinds == {(1, 0)}:
        N = max(max((i - 1) // 2, j // 2) for i, j in p.terms)
        return MonomialSubspace(R_KIND, max(N, 1))
    if kinds == {(0, 1)}:
        N = max(max(i // 2, (j - 1) // 2 + 1) for i, j in p.terms)
        return MonomialSubspace(S_KIND, max(N, 1))
    raise ValueError("polynomial does not lie in a single parity class R_N or S_N")


def solve_box(rhs: BiPoly) -> BiPoly:
    """Kernel-free particular solution of box F = rhs by back-substitution."""
    if rhs.is_zero():
        return BiPoly({}, XS)
    if rhs(1, 1) != 0:
        raise SolvabilityError(f"right-hand side is {rhs(1, 1)} at (1, 1), not 0")
    space = enclosing_subspace(rhs)
    basis = space.basis
    residual = dict(rhs.terms)
    sol: dict[tuple[int, int], Fraction] = {}
    kernel = space.kernel_exponent()
    for e in reversed(basis):
        c = residual.pop(e, Fraction(0))
        if e == kernel:
            if c:
                raise SolvabilityError("component along the cokernel does not vanish")
            continue
        if not c:
            continue
        col = _box_column(*e)
        x = c / col[e]
        sol[e] = x
        for f, m in col.items():
            if f != e:
                residual[f] = residual.get(f, 0) - x * m
    leftover = {k: v for k, v in residual.items() if v}
    if leftover:
        raise SolvabilityError(f"unresolved terms {leftover}")
    return BiPoly(sol, XS)


def deform(F0, H1: BiPoly | None = None) -> ConservedDensity:
    """First-order deformation F1 of a Boussinesq density F0."""
    if isinstance(F0, ConservedDensity):
        if F0.family != POLYNOMIAL or F0.variables != "xisigma":
            raise ValueError("deform needs a polynomial-family density in (xi, sigma)")
        index, F0 = F0.index, F0.density
    else:
        index = 0
    F1 = solve_box(deformation_rhs(F0, H1))
    return ConservedDensity(POLYNOMIAL, index, F1, "xisigma", deformation_order=1)


@lru_cache(maxsize=None)
def deformed_pair(j: int) -> tuple[BiPoly, BiPoly]:
    F0 = polynomial_density(j)
    return F0, deform(F0).density


def verify_first_order(F0: BiPoly, F1: BiPoly, H0: BiPoly | None = None,
                       H1: BiPoly | None = None):
    """Check conservation at O(1) and O(r); returns (ok, (residual0, residual1))."""
    if H0 is None or H1 is None:
        series = boussinesq_series()
        H0 = series[0] if H0 is None else H0
        H1 = series[1] if H1 is None else H1
    res0 = bracket_residual(F0, H0)
    res1 = bracket_residual(F1, H0) + bracket_residual(F0, H1)
    return res0.is_zero() and res1.is_zero(), (res0, res1)


def involution_table(max_index: int) -> dict[tuple[int, int], bool]:
    """Pairwise O(r) involution of F0_j + r F1_j for 1 <= j < k <= max_index."""
    pairs = {j: deformed_pair(j) for j in range(1, max_index + 1)}
    table = {}
    for j in range(1, max_index + 1):
        for k in range(j + 1, max_index + 1):
            F0, F1 = pairs[j]
            G0, G1 = pairs[k]
            order0 = bracket_residual(F0, G0)
            order1 = bracket_residual(F1, G0) + bracket_residual(F0, G1)
            table[(j, k)] = order0.is_zero() and order1.is_zero()
    return table
