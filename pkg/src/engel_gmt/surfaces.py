"""Parametrized surface patches and their tangent 2-vectors in the left invariant frame."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import algebra as alg
from .algebra import (
    PAIRS,
    PAIR_DEGREES,
    STANDARD,
    AlgebraElement,
    FrameTwoVector,
    bch_product,
    two_vector_degree,
    vector_degree,
)
from .errors import DomainError, RankDeficientError
from .geometry import Form, coframe_forms, coframe_matrix
from .poly import MultiPoly, variables


def _as_number(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return float(v)


def _domain(dom):
    (a, b), (c, d) = dom
    out = tuple(tuple(_as_number(v) for v in iv) for iv in ((a, b), (c, d)))
    for lo, hi in out:
        if not lo < hi:
            raise ValueError("empty chart domain")
    return out


class SurfaceChart:
    """Polynomial chart phi: [a,b] x [c,d] -> R^4 (exponential coordinates)."""

    is_polynomial = True

    def __init__(self, components, domain=((-1, 1), (-1, 1)), xi=STANDARD, name=None):
        comps = []
        for c in components:
            if not isinstance(c, MultiPoly):
                c = MultiPoly.const(c, 2)
            if c.nvars != 2:
                raise ValueError("chart components must be polynomials in two variables")
            comps.append(c)
        if len(comps) != 4:
            raise ValueError("a chart needs 4 components")
        self.components = tuple(comps)
        self.domain = _domain(domain)
        self.xi = xi
        self.name = name
        self.partials = tuple(tuple(c.diff(i) for i in range(2)) for c in self.components)
        self._fcomps = None
        self._tv = None

    def __repr__(self):
        body = ", ".join(c.to_string(["u1", "u2"]) for c in self.components)
        return f"SurfaceChart({body})"

    @property
    def exact(self):
        return self.xi.exact and all(
            isinstance(c, Fraction) for p in self.components for c in p.terms.values()
        )

    def check_domain(self, u):
        u1, u2 = u
        (a, b), (c, d) = self.domain
        if not (a <= u1 <= b and c <= u2 <= d):
            raise DomainError(f"point {tuple(u)} outside chart domain {self.domain}")

    def point(self, u):
        self.check_domain(u)
        return AlgebraElement(*(c(*u) for c in self.components))

    def jacobian(self, u):
        self.check_domain(u)
        return tuple(tuple(p(*u) for p in row) for row in self.partials)

    # vectorized float evaluation
    def _floats(self):
        if self._fcomps is None:
            self._fcomps = (
                tuple(c.to_float() for c in self.components),
                tuple(tuple(p.to_float() for p in row) for row in self.partials),
            )
        return self._fcomps

    def point_array(self, u1, u2):
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        comps, _ = self._floats()
        return np.stack([c(u1, u2) for c in comps])

    def jacobian_array(self, u1, u2):
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        _, parts = self._floats()
        return np.stack([np.stack([p(u1, u2) for p in row]) for row in parts])

    def tangent_polys(self):
        """Frame 2-vector coefficients as exact polynomials in (u1, u2)."""
        if self._tv is None:
            m = minors_from_jacobian(self.partials)
            self._tv = two_vector_from_minors(self.components, m, self.xi)
        return self._tv

    def tangent_array(self, u1, u2):
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        return np.stack([p.to_float()(u1, u2) for p in self.tangent_polys()])

    # constructions
    def translate(self, q):
        """Left translate: u -> q . phi(u)."""
        q = AlgebraElement(*(Fraction(v) if isinstance(v, int) else v for v in q))
        moved = bch_product(q, AlgebraElement(*self.components), self.xi)
        return SurfaceChart(moved, self.domain, self.xi, self.name)

    def reparametrize(self, M, b, domain):
        """phi(M v + b) on a new rectangle (affine change of parameters)."""
        v1, v2 = variables(2)
        w1 = M[0][0] * v1 + M[0][1] * v2 + b[0]
        w2 = M[1][0] * v1 + M[1][1] * v2 + b[1]
        return SurfaceChart([c(w1, w2) for c in self.components], domain, self.xi, self.name)

    def with_xi(self, xi):
        return SurfaceChart(self.components, self.domain, xi, self.name)


class CallableChart:
    """Chart given by vectorized callables; the Jacobian must be supplied analytically."""

    is_polynomial = False
    exact = False

    def __init__(self, point_fn, jacobian_fn, domain, xi=STANDARD, name=None):
        self.point_fn = point_fn
        self.jacobian_fn = jacobian_fn
        self.domain = _domain(domain)
        self.xi = xi
        self.name = name

    check_domain = SurfaceChart.check_domain

    def point(self, u):
        self.check_domain(u)
        return AlgebraElement(*(float(v) for v in self.point_fn(float(u[0]), float(u[1]))))

    def jacobian(self, u):
        self.check_domain(u)
        J = np.asarray(self.jacobian_fn(float(u[0]), float(u[1])), dtype=float)
        return tuple(tuple(float(v) for v in row) for row in J)

    def point_array(self, u1, u2):
        return np.asarray(self.point_fn(np.asarray(u1, float), np.asarray(u2, float)), dtype=float)

    def jacobian_array(self, u1, u2):
        return np.asarray(self.jacobian_fn(np.asarray(u1, float), np.asarray(u2, float)), dtype=float)

    def tangent_array(self, u1, u2):
        phi = self.point_array(u1, u2)
        J = self.jacobian_array(u1, u2)
        m = minors_from_jacobian(J)
        return np.stack(two_vector_from_minors(phi, m, self.xi.to_float()))


# ---------------------------------------------------------------- pointwise formulas


def minors_from_jacobian(J):
    """phi^{ij} = d1 phi_i d2 phi_j - d2 phi_i d1 phi_j, in PAIRS order."""
    return tuple(J[i - 1][0] * J[j - 1][1] - J[i - 1][1] * J[j - 1][0] for i, j in PAIRS)


def _consts(vals, xi):
    numeric = any(isinstance(v, (float, np.ndarray, np.floating)) for v in vals)
    if numeric:
        return xi.to_float() if xi.exact else xi, 0.5, 0.25, 1.0 / 6.0, 1.0 / 12.0
    return xi, Fraction(1, 2), Fraction(1, 4), Fraction(1, 6), Fraction(1, 12)


def two_vector_from_minors(phi, m, xi=STANDARD):
    """Closed-form frame coefficients of d1 phi ^ d2 phi from the point and its minors."""
    p1, p2, p3, _ = phi
    m12, m13, m14, m23, m24, m34 = m
    xi, h, q, s, tw = _consts(tuple(phi) + tuple(m), xi)
    a, b, c = xi.xi12, xi.xi13, xi.xi23
    lin = h * (b * p1 + c * p2)
    c12 = m12
    c13 = m13 - h * a * p1 * m12
    c23 = m23 - h * a * p2 * m12
    c14 = m14 - lin * m13 + (s * a * (c * p1 * p2 + b * p1 * p1) + h * c * p3) * m12
    c24 = m24 - lin * m23 + (s * a * (b * p1 * p2 + c * p2 * p2) - h * b * p3) * m12
    c34 = (
        m34
        + (tw * a * (c * p1 * p2 + b * p1 * p1) - h * c * p3) * m23
        - h * a * p1 * m24
        + h * a * p2 * m14
        - (tw * a * (b * p1 * p2 + c * p2 * p2) + h * b * p3) * m13
        + q * a * (b * p1 * p3 + c * p2 * p3) * m12
    )
    return FrameTwoVector(c12, c13, c14, c23, c24, c34)


def _check_rank(m, tol=None):
    if all(isinstance(v, (int, Fraction)) for v in m):
        if all(v == 0 for v in m):
            raise RankDeficientError("chart differential has rank < 2")
        return
    tol = alg.ZERO_TOL if tol is None else tol
    if max(abs(float(v)) for v in m) < tol:
        raise RankDeficientError("chart differential has rank < 2 (numerically)")


def chart_minors(s, u):
    return minors_from_jacobian(s.jacobian(u))


def tangent_two_vector(s, u, tol=None):
    m = chart_minors(s, u)
    _check_rank(m, tol)
    phi = s.point(u)
    xi = s.xi if s.is_polynomial else s.xi.to_float()
    return two_vector_from_minors(tuple(phi), m, xi)


def change_of_coefficients(s, u):
    """c[j][i] = theta_j(d_i phi): the columns are d_i phi in the frame."""
    phi = s.point(u)
    J = s.jacobian(u)
    B = coframe_matrix(s.xi)
    exact = all(isinstance(v, Fraction) for v in phi) and all(
        isinstance(v, Fraction) for row in J for v in row
    )
    if not exact:
        phi = tuple(float(v) for v in phi)
        J = tuple(tuple(float(v) for v in row) for row in J)
    Bv = [[b(*phi) if not b.is_zero() else 0 for b in row] for row in B]
    out = []
    for j in range(4):
        out.append(tuple(sum(Bv[j][l] * J[l][i] for l in range(4)) for i in range(2)))
    return tuple(out)


def wedge_columns(c):
    return FrameTwoVector(*(c[i - 1][0] * c[j - 1][1] - c[j - 1][0] * c[i - 1][1] for i, j in PAIRS))


def pointwise_degree(s, u, tol=None):
    return two_vector_degree(tangent_two_vector(s, u, tol), tol)


def grid_points(domain, n, exact=True):
    """n x n grid including the corners; rational when the domain is."""
    (a, b), (c, d) = domain
    if n < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if exact and all(isinstance(v, Fraction) for v in (a, b, c, d)):
        xs = [a + (b - a) * Fraction(k, n - 1) for k in range(n)]
        ys = [c + (d - c) * Fraction(k, n - 1) for k in range(n)]
    else:
        xs = list(np.linspace(float(a), float(b), n))
        ys = list(np.linspace(float(c), float(d), n))
    return [(x, y) for x in xs for y in ys]


@dataclass
class SurfaceDegreeReport:
    degree: int
    singular: list
    table: list = field(repr=False)


def surface_degree(s, grid=65, tol=None, region=None):
    """Max pointwise degree over a grid plus the sampled points of lower degree."""
    dom = _domain(region) if region is not None else s.domain
    pts = grid_points(dom, grid, exact=s.exact)
    table = []
    if s.is_polynomial and s.exact:
        tv = s.tangent_polys()
        for u in pts:
            c = tuple(p(*u) for p in tv)
            _check_rank(c, tol)
            table.append((u[0], u[1], two_vector_degree(c, tol)))
    else:
        for u in pts:
            table.append((u[0], u[1], pointwise_degree(s, u, tol)))
    deg = max(t[2] for t in table)
    singular = [(t[0], t[1]) for t in table if t[2] < deg]
    return SurfaceDegreeReport(deg, singular, table)


# ---------------------------------------------------------------- homogeneous tangent space


@dataclass(frozen=True)
class HomogeneousPlane:
    """Plane span{v, w} of R^4 with v, w orthonormal and graded (single-stratum)."""

    v: tuple
    w: tuple

    @property
    def weights(self):
        return (_stratum_weight(self.v), _stratum_weight(self.w))

    @property
    def homogeneous_dimension(self):
        return sum(self.weights)

    def as_array(self):
        return np.array([self.v, self.w], dtype=float)


def _stratum_weight(v):
    ws = {alg.WEIGHTS[i] for i in range(4) if abs(float(v[i])) > 1e-12}
    if len(ws) != 1:
        raise ValueError(f"vector {v} is not contained in one stratum")
    return ws.pop()


def coordinate_plane(i, j):
    """span{e_i, e_j}, 1-based."""
    e = np.eye(4)
    return HomogeneousPlane(tuple(e[i - 1]), tuple(e[j - 1]))


def plane_from_top_block(c, tol=None):
    """Homogeneous plane carrying the top-degree block of a frame 2-vector."""
    c = FrameTwoVector(*c)
    N = two_vector_degree(c, tol)
    f = [float(v) for v in c]
    if N == 2:
        return HomogeneousPlane((1.0, 0, 0, 0), (0, 1.0, 0, 0)), N
    if N == 5:
        return HomogeneousPlane((0, 0, 1.0, 0), (0, 0, 0, 1.0)), N
    # N = 3: (c13 Y1 + c23 Y2) ^ Y3, N = 4: (c14 Y1 + c24 Y2) ^ Y4
    h1, h2 = (f[1], f[3]) if N == 3 else (f[2], f[4])
    n = float(np.hypot(h1, h2))
    other = (0, 0, 1.0, 0) if N == 3 else (0, 0, 0, 1.0)
    return HomogeneousPlane((h1 / n, h2 / n, 0.0, 0.0), other), N


def homogeneous_tangent_space(s, u, tol=None):
    plane, _ = plane_from_top_block(tangent_two_vector(s, u, tol), tol)
    return plane


def top_block(c, N):
    """Entries of c of degree exactly N (others zeroed)."""
    return FrameTwoVector(*(v if d == N else 0 * v for v, d in zip(c, PAIR_DEGREES)))


# ---------------------------------------------------------------- residuals


def _region_grid(s, region, grid):
    dom = _domain(region) if region is not None else s.domain
    (a, b), (c, d) = dom
    x = np.linspace(float(a), float(b), grid)
    y = np.linspace(float(c), float(d), grid)
    return np.meshgrid(x, y, indexing="ij")


def degree_constraint_residuals(s, region=None, grid=33):
    """Sup over a grid of |c14|, |c24|, |c34|, |c13|, |c23|."""
    U1, U2 = _region_grid(s, region, grid)
    T = s.tangent_array(U1, U2)
    names = ("c12", "c13", "c14", "c23", "c24", "c34")
    sup = {n: float(np.max(np.abs(T[k]))) for k, n in enumerate(names)}
    return {k: sup[k] for k in ("c14", "c24", "c34", "c13", "c23")}


def degree3_graph_identity_residual(s, u):
    """For a chart (x1, phi2, x3, phi4): d3 phi4 minus the value forced by a vanishing Y1^Y4 coefficient."""
    x1, p2, x3, _ = (float(v) for v in s.point(u))
    J = np.asarray(s.jacobian(u), dtype=float)
    a, b, c = (float(v) for v in s.xi.as_tuple())
    d3p2, d3p4 = J[1, 1], J[3, 1]
    rhs = 0.5 * (b * x1 + c * p2) - (0.5 * c * x3 + a * (c * x1 * p2 + b * x1 * x1) / 6.0) * d3p2
    return d3p4 - rhs


def degree4_graph_identity_residual(s, u):
    """For a chart (x1, phi2, phi3, x4): d1 phi3 minus the value forced by a vanishing Y3^Y4 coefficient."""
    x1, p2, p3, _ = (float(v) for v in s.point(u))
    J = np.asarray(s.jacobian(u), dtype=float)
    a, b, c = (float(v) for v in s.xi.as_tuple())
    d1p2, d4p2 = J[1, 0], J[1, 1]
    d1p3, d4p3 = J[2, 0], J[2, 1]
    P1 = a * (c * x1 * p2 + b * x1 * x1) / 12.0 - 0.5 * c * p3
    P2 = a * (b * x1 * p2 + c * p2 * p2) / 12.0 + 0.5 * b * p3
    P3 = 0.25 * a * b * x1 * p3 + 0.25 * a * c * p2 * p3
    rhs = (0.5 * a * x1 * d1p2 - 0.5 * a * p2 - P1 * d1p2 * d4p3 - P3 * d4p2 + P2 * d4p3) / (1.0 - P1 * d4p2)
    return d1p3 - rhs


def pulled_back_coframe(s):
    """phi^* theta_k as exact 1-forms in (u1, u2)."""
    return tuple(th.pullback(s.components) for th in coframe_forms(s.xi))


def horizontality_residual(s, region=None, grid=33):
    """Sup over a grid of ||phi^* theta3|| + ||phi^* theta4|| (coefficient sup-norms)."""
    U1, U2 = _region_grid(s, region, grid)
    if s.is_polynomial:
        forms = pulled_back_coframe(s)
        vals = []
        for k in (2, 3):
            coeffs = [forms[k].coefficient(i).to_float()(U1, U2) for i in range(2)]
            vals.append(np.maximum(np.abs(coeffs[0]), np.abs(coeffs[1])))
    else:
        phi = s.point_array(U1, U2)
        J = s.jacobian_array(U1, U2)
        B = coframe_matrix(s.xi)
        vals = []
        for k in (2, 3):
            coeffs = []
            for i in range(2):
                coeffs.append(sum(B[k][l].to_float()(*phi) * J[l, i] for l in range(4)))
            vals.append(np.maximum(np.abs(coeffs[0]), np.abs(coeffs[1])))
    return float(np.max(vals[0] + vals[1]))


def _circle_samples(n):
    """Rational points (cos, sin) and tangent directions via t = tan(theta/2)."""
    out = [((Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1)))]
    m = max(1, n // 2)
    for k in range(-2 * m, 2 * m + 1):
        t = Fraction(k, m)
        den = 1 + t * t
        pt = ((1 - t * t) / den, 2 * t / den)
        tan = (-2 * t / den, (1 - t * t) / den)
        out.append((pt, tan))
    return out


def boundary_degree(s, center=(0, 0), radius=Fraction(1, 2), samples=64, tol=None):
    """Max degree of the tangent 1-vector of phi(circle) over rational samples."""
    center = tuple(_as_number(c) for c in center)
    radius = _as_number(radius)
    (a, b), (c, d) = s.domain
    if not (a <= center[0] - radius and center[0] + radius <= b and c <= center[1] - radius and center[1] + radius <= d):
        raise DomainError("boundary circle leaves the chart domain")
    B = coframe_matrix(s.xi)
    deg = 0
    for (cx, sy), (tx, ty) in _circle_samples(samples):
        u = (center[0] + radius * cx, center[1] + radius * sy)
        phi = tuple(s.point(u))
        J = s.jacobian(u)
        vel = [J[l][0] * tx + J[l][1] * ty for l in range(4)]
        frame = [sum((B[k][l](*phi) if not B[k][l].is_zero() else 0) * vel[l] for l in range(4)) for k in range(4)]
        deg = max(deg, vector_degree(frame, tol))
    return deg


# ---------------------------------------------------------------- canonical charts


def chart_from_strings(exprs, domain=((-1, 1), (-1, 1)), xi=STANDARD, name=None):
    from .parser import parse_expression

    return SurfaceChart([parse_expression(e) for e in exprs], domain, xi, name)


CANONICAL = {
    "vplane": ("0", "u1", "u2", "0"),
    "hplane": ("u1", "u2", "0", "0"),
    "plane14": ("u1", "0", "0", "u2"),
    "plane34": ("0", "0", "u1", "u2"),
    "mixed": ("u1", "0", "u2", "0"),
}


def canonical_chart(name, domain=((-1, 1), (-1, 1)), xi=STANDARD):
    u1, u2 = variables(2)
    table = {"0": MultiPoly(nvars=2), "u1": u1, "u2": u2}
    return SurfaceChart([table[e] for e in CANONICAL[name]], domain, xi, name)
