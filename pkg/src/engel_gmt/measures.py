"""Riemannian area, intrinsic measure, line and surface integrals, Stokes checks."""
from dataclasses import dataclass

import numpy as np

from .algebra import PAIR_DEGREES, PAIRS
from .errors import DomainError
from .geometry import Ball, coframe_forms
from .quadrature import (
    BallPreimage,
    Disk,
    Estimate,
    QuadratureSpec,
    Rect,
    estimate_from_history,
    integrate_mc,
    integrate_polar,
    integrate_rows,
)
from .surfaces import surface_degree

DEFAULT_SPEC = QuadratureSpec()


def _jacobian_weight(s):
    def f(u1, u2):
        T = s.tangent_array(u1, u2)
        return np.sqrt(np.sum(T * T, axis=0))

    return f


def _top_weight(s, N):
    keep = [k for k, d in enumerate(PAIR_DEGREES) if d == N]

    def f(u1, u2):
        T = s.tangent_array(u1, u2)
        return np.sqrt(np.sum(T[keep] ** 2, axis=0))

    return f


def _window(s):
    (a, b), (c, d) = s.domain
    return (float(a), float(b), float(c), float(d))


def _clip_rect(s, region):
    a, b, c, d = _window(s)
    return Rect(max(a, region.a1), min(b, region.b1), max(c, region.a2), min(d, region.b2))


def _integrate(s, region, weight, q, seeds=()):
    if region is None:
        region = Rect(*_window(s))
    if isinstance(region, Ball):
        region = BallPreimage(s, region) if s.is_polynomial else region
    if isinstance(region, Rect):
        region = _clip_rect(s, region)
        return integrate_rows(region, weight, q)
    if isinstance(region, Disk):
        if not region.inside(s.domain):
            raise DomainError("disk leaves the chart domain")
        return integrate_polar(region, weight, q)
    if isinstance(region, BallPreimage):
        est = integrate_rows(region, weight, q, seeds)
        if est.value == 0.0 and not est.history[-1]:
            return Estimate(0.0, 0.0, est.history, "rows", "ball disjoint from patch")
        return est
    if isinstance(region, Ball):
        ball = region

        def contains(u1, u2):
            return ball.contains(np.moveaxis(s.point_array(u1, u2), 0, -1))

        est = integrate_mc(contains, weight, _window(s), q)
        if est.value == 0.0:
            return Estimate(0.0, 0.0, est.history, "mc", "ball disjoint from patch")
        return est
    raise TypeError(f"unsupported region {region!r}")


def riemannian_area(s, region=None, q=DEFAULT_SPEC, seeds=()):
    """Integral of the Riemannian Jacobian |d1 phi ^ d2 phi|_g over a region of the chart."""
    return _integrate(s, region, _jacobian_weight(s), q, seeds)


def intrinsic_measure(s, ball, q=DEFAULT_SPEC, degree=None, seeds=()):
    """mu_Sigma(ball): integral of the norm of the degree-N block of the tangent 2-vector."""
    N = degree if degree is not None else surface_degree(s, 17).degree
    return _integrate(s, ball, _top_weight(s, N), q, seeds)


# ---------------------------------------------------------------- forms on charts


class Loop:
    """Closed parametrized curve in R^4 on [0, period)."""

    def __init__(self, point, velocity, period=2 * np.pi, check=True):
        self.point = point
        self.velocity = velocity
        self.period = float(period)
        if check:
            a = np.asarray(point(np.array([0.0])), dtype=float)
            b = np.asarray(point(np.array([self.period])), dtype=float)
            if not np.allclose(a, b, rtol=0, atol=1e-10 * (1 + np.max(np.abs(a)))):
                raise ValueError("curve is not closed")


def chart_circle(s, center, radius):
    """phi(center + radius (cos, sin)), counterclockwise in parameter space."""
    c1, c2 = (float(v) for v in center)
    r = float(radius)
    if not Disk((c1, c2), r).inside(s.domain):
        raise DomainError("circle leaves the chart domain")

    def point(th):
        return s.point_array(c1 + r * np.cos(th), c2 + r * np.sin(th))

    def velocity(th):
        J = s.jacobian_array(c1 + r * np.cos(th), c2 + r * np.sin(th))
        return J[:, 0] * (-r * np.sin(th)) + J[:, 1] * (r * np.cos(th))

    return Loop(point, velocity)


def line_integral(omega, curve, q=DEFAULT_SPEC):
    """Loop integral of a polynomial 1-form, uniform rule (spectral for smooth loops)."""
    if not isinstance(curve, Loop):
        raise TypeError("line_integral needs a closed Loop")
    if omega.k != 1:
        raise ValueError("need a 1-form")
    coeffs = [(i, c.to_float()) for (i,), c in omega.coeffs.items()]
    history = []
    for n in q.resolutions():
        m = 4 * n
        th = curve.period * (np.arange(m) + 0.5) / m
        P = curve.point(th)
        V = curve.velocity(th)
        f = np.zeros(m)
        for i, c in coeffs:
            f = f + c(*P) * V[i]
        history.append(float(np.sum(f) * curve.period / m))
    return estimate_from_history(history, "loop")


def pulled_back_density(Omega, s):
    """u -> coefficient of du1 ^ du2 in phi^* Omega, vectorized."""
    if Omega.k != 2:
        raise ValueError("need a 2-form")
    coeffs = [((i, j), c.to_float()) for (i, j), c in Omega.coeffs.items()]

    def f(u1, u2):
        P = s.point_array(u1, u2)
        J = s.jacobian_array(u1, u2)
        out = np.zeros(np.broadcast(np.asarray(u1), np.asarray(u2)).shape)
        for (i, j), c in coeffs:
            minor = J[i, 0] * J[j, 1] - J[i, 1] * J[j, 0]
            out = out + c(*P) * minor
        return out

    return f


def surface_integral(Omega, s, region=None, q=DEFAULT_SPEC):
    if Omega.is_zero():
        return Estimate(0.0, 0.0, (0.0,), "exact", "zero form")
    return _integrate(s, region, pulled_back_density(Omega, s), q)


@dataclass(frozen=True)
class StokesReport:
    radius: float
    line: Estimate
    surface: Estimate
    defect: float
    error: float
    ratio: float
    ratio_error: float
    prediction: float

    @property
    def consistent(self):
        return self.defect <= self.error + 1e-13


def stokes_check(s, radius, q=DEFAULT_SPEC, center=(0.0, 0.0), form_index=3):
    """Compare the loop integral of theta_4 over phi(dB_r) with the integral of d theta_4 over phi(B_r)."""
    disk = Disk(center, radius)
    if not disk.inside(s.domain):
        raise DomainError("disk B_r is not contained in the chart domain")
    theta = coframe_forms(s.xi)[form_index]
    line = line_integral(theta, chart_circle(s, center, radius), q)
    surf = surface_integral(theta.d(), s, disk, q)
    area = np.pi * float(radius) ** 2
    T = s.tangent_array(np.array(float(center[0])), np.array(float(center[1])))
    xi = s.xi
    # limit of the normalized surface term: -xi13 c13 - xi23 c23 at the center
    pred = -float(xi.xi13) * float(T[PAIRS.index((1, 3))]) - float(xi.xi23) * float(T[PAIRS.index((2, 3))]) + 0.0
    return StokesReport(
        float(radius), line, surf,
        abs(line.value - surf.value), line.error + surf.error,
        surf.value / area, surf.error / area, pred,
    )


def stokes_schedule(s, radii, q=DEFAULT_SPEC, center=(0.0, 0.0)):
    """stokes_check over a decreasing radius schedule."""
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radius schedule must be strictly decreasing")
    return [stokes_check(s, r, q, center) for r in radii]
