"""Adapted graded frames at a surface point and the recentred graph chart."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra as alg
from .algebra import StructureCoefficients
from .errors import ConvergenceError, RankDeficientError
from .surfaces import CallableChart, SurfaceChart, chart_minors, _check_rank


def _nz(v, scale, tol):
    return not alg.is_zero(v, scale, tol)


def strata_ranks(D, tol=None):
    """(alpha1, alpha2, alpha3) and the horizontal tangent direction (or None) of span(D)."""
    exact = all(isinstance(v, Fraction) for row in D for v in row)
    scale = 0.0 if exact else float(np.max(np.abs(np.asarray(D, dtype=float))))
    row4 = D[3]
    if _nz(row4[0], scale, tol) or _nz(row4[1], scale, tol):
        a3 = 1
        n = (row4[1], -row4[0])
        k = [D[i][0] * n[0] + D[i][1] * n[1] for i in range(4)]
        a2 = 1 if _nz(k[2], scale, tol) else 0
        horiz = None if a2 else (k[0], k[1])
    else:
        a3 = 0
        row3 = D[2]
        if _nz(row3[0], scale, tol) or _nz(row3[1], scale, tol):
            a2 = 1
            n = (row3[1], -row3[0])
            horiz = (D[0][0] * n[0] + D[0][1] * n[1], D[1][0] * n[0] + D[1][1] * n[1])
        else:
            a2 = 0
            horiz = None
    a1 = 2 - a2 - a3
    return (a1, a2, a3), (horiz if a1 == 1 else None)


GRAPH_INDEX = {(2, 0, 0): (0, 1), (1, 1, 0): (0, 2), (1, 0, 1): (0, 3), (0, 1, 1): (2, 3)}


def _cos_sin(angle):
    if isinstance(angle, tuple):
        return angle
    return math.cos(angle), math.sin(angle)


def rotated_coefficients(xi, angle):
    """angle may be a number or an exact (cos, sin) pair."""
    c, s = _cos_sin(angle)
    x12, x13, x23 = (float(v) for v in xi.as_tuple())
    return StructureCoefficients(x12, c * x13 + s * x23, -s * x13 + c * x23)


def rotation_basis(angle):
    """Columns are the new basis vectors in old coordinates."""
    c, s = _cos_sin(angle)
    M = np.eye(4)
    M[0, 0], M[1, 0] = c, s
    M[0, 1], M[1, 1] = -s, c
    return M


class GraphChart(CallableChart):
    """phi(z) = psi(w(z)) with pi(psi(w)) = z solved by damped Newton."""

    def __init__(self, psi_polys, dpsi_polys, graph, domain, xi, tol=1e-13, max_iter=60):
        self.psi = psi_polys
        self.dpsi = dpsi_polys
        self.graph = graph
        self.tol = tol
        self.max_iter = max_iter
        g0, g1 = graph
        P = np.array([[float(self.dpsi[g][i](0.0, 0.0)) for i in range(2)] for g in graph])
        self._P0inv = np.linalg.inv(P)
        self.last_residual = 0.0
        super().__init__(self._point, self._jac, domain, xi, name="graph")

    def _eval(self, w1, w2):
        return np.stack([p(w1, w2) for p in self.psi])

    def _deval(self, w1, w2):
        return np.stack([np.stack([d(w1, w2) for d in row]) for row in self.dpsi])

    def solve(self, z1, z2):
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        shape = np.broadcast(z1, z2).shape
        z1 = np.broadcast_to(z1, shape).astype(float)
        z2 = np.broadcast_to(z2, shape).astype(float)
        g0, g1 = self.graph
        w1 = self._P0inv[0, 0] * z1 + self._P0inv[0, 1] * z2
        w2 = self._P0inv[1, 0] * z1 + self._P0inv[1, 1] * z2
        eps = np.finfo(float).eps

        def resid(a, b):
            v = self._eval(a, b)
            return v[g0] - z1, v[g1] - z2

        f1, f2 = resid(w1, w2)
        for _ in range(self.max_iter):
            D = self._deval(w1, w2)
            a, b, c, d = D[g0, 0], D[g0, 1], D[g1, 0], D[g1, 1]
            det = a * d - b * c
            s1 = (d * f1 - b * f2) / det
            s2 = (-c * f1 + a * f2) / det
            step = np.ones(shape)
            norm0 = np.hypot(f1, f2)
            n1, n2 = w1 - s1, w2 - s2
            g_1, g_2 = resid(n1, n2)
            # backtrack where the full step increases the residual
            for _h in range(20):
                bad = np.hypot(g_1, g_2) > norm0 * (1 - 1e-4 * step) + 4 * eps * (np.abs(z1) + np.abs(z2))
                if not np.any(bad):
                    break
                step = np.where(bad, step * 0.5, step)
                n1, n2 = w1 - step * s1, w2 - step * s2
                g_1, g_2 = resid(n1, n2)
            done = np.all(np.abs(step * s1) <= 4 * eps * np.abs(w1) + 1e-300) and np.all(
                np.abs(step * s2) <= 4 * eps * np.abs(w2) + 1e-300
            )
            w1, w2, f1, f2 = n1, n2, g_1, g_2
            if done:
                break
        res = float(np.max(np.hypot(f1, f2) / (1.0 + np.hypot(z1, z2)))) if f1.size else 0.0
        self.last_residual = res
        if not res <= 1e-10:
            raise ConvergenceError(f"graph chart Newton inversion failed (residual {res:.3e})", res)
        return w1, w2, z1, z2

    def _point(self, z1, z2):
        w1, w2, z1, z2 = self.solve(z1, z2)
        out = self._eval(w1, w2)
        g0, g1 = self.graph
        out[g0] = z1
        out[g1] = z2
        return out

    def _jac(self, z1, z2):
        w1, w2, _, _ = self.solve(z1, z2)
        D = self._deval(w1, w2)
        g0, g1 = self.graph
        a, b, c, d = D[g0, 0], D[g0, 1], D[g1, 0], D[g1, 1]
        det = a * d - b * c
        i00, i01, i10, i11 = d / det, -b / det, -c / det, a / det
        out = np.empty_like(D)
        for k in range(4):
            out[k, 0] = D[k, 0] * i00 + D[k, 1] * i10
            out[k, 1] = D[k, 0] * i01 + D[k, 1] * i11
        out[g0] = 0.0
        out[g1] = 0.0
        out[g0, 0] = 1.0
        out[g1, 1] = 1.0
        return out


@dataclass
class AdaptedFrameReport:
    angle: float
    basis: np.ndarray
    xi_new: StructureCoefficients
    alphas: tuple
    graph_indices: tuple
    chart: GraphChart = field(repr=False)
    translated: SurfaceChart = field(repr=False)
    jacobian0: np.ndarray = field(repr=False)
    newton_residual: float = 0.0

    @property
    def degree(self):
        a1, a2, a3 = self.alphas
        return a1 + 2 * a2 + 3 * a3


def adapted_frame(s, u0, tol=None, radius=None):
    """Translate phi(u0) to 0, rotate V1 onto the horizontal tangent, rewrite as a graph."""
    if not s.is_polynomial:
        raise TypeError("adapted_frame needs a polynomial chart")
    u0 = tuple(Fraction(v) if isinstance(v, int) else v for v in u0)
    s.check_domain(u0)
    _check_rank(chart_minors(s, u0), tol)
    p = s.point(u0)
    (a, b), (c, d) = s.domain
    shifted = s.reparametrize(((1, 0), (0, 1)), u0, ((a - u0[0], b - u0[0]), (c - u0[1], d - u0[1])))
    psi = shifted.translate(tuple(-v for v in p))
    D = psi.jacobian((0 * u0[0], 0 * u0[1]))
    alphas, horiz = strata_ranks(D, tol)
    if horiz is not None:
        h1, h2 = float(horiz[0]), float(horiz[1])
        n = math.hypot(h1, h2)
        cs = (h1 / n, h2 / n)
    else:
        cs = (1.0, 0.0)
    angle = math.atan2(cs[1], cs[0])
    M = rotation_basis(cs)
    Mt = M.T
    fl = [c.to_float() for c in psi.components]
    psi_new = []
    for k in range(4):
        acc = None
        for l in range(4):
            if Mt[k, l] != 0.0:
                term = fl[l] * float(Mt[k, l])
                acc = term if acc is None else acc + term
        psi_new.append(acc if acc is not None else fl[0] * 0.0)
    dpsi_new = [tuple(p.diff(i) for i in range(2)) for p in psi_new]
    graph = GRAPH_INDEX[alphas]
    xi_new = rotated_coefficients(s.xi, cs)
    D_new = Mt @ np.asarray(D, dtype=float)
    P = D_new[list(graph)]
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[-1] == 0:
        raise RankDeficientError("graph coordinates are degenerate")
    dist = min(float(u0[0] - a), float(b - u0[0]), float(u0[1] - c), float(d - u0[1]))
    rho = radius if radius is not None else 0.5 * dist * sv[-1] / max(1.0, sv[0])
    if not rho > 0:
        raise ValueError("base point lies on the domain boundary")
    chart = GraphChart(psi_new, dpsi_new, graph, ((-rho, rho), (-rho, rho)), xi_new)
    J0 = chart.jacobian_array(0.0, 0.0)
    return AdaptedFrameReport(angle, M, xi_new, alphas, tuple(g + 1 for g in graph), chart, psi,
                              J0, chart.last_residual)
