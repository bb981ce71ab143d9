"""Spherical factors, Federer densities, blow-up exponents, box-ball constants and divergence probes."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .adapted import adapted_frame
from .algebra import WEIGHTS, bch_product
from .errors import ConvergenceError, DomainError
from .geometry import DEFAULT_NORM, Ball
from .measures import DEFAULT_SPEC, intrinsic_measure, riemannian_area
from .poly import MultiPoly, variables
from .quadrature import BallPreimage, CompositeBasis, Estimate, QuadratureSpec, integrate_rows
from .surfaces import HomogeneousPlane, SurfaceChart, surface_degree

SEARCH_GRID = 5
SEARCH_STARTS = 4
LAMBDA_GRID = 4096
DIVERGENCE_TOL = 0.05


# ---------------------------------------------------------------- slices of balls by planes


def _translate_bounds(u, q, r):
    """Per-coordinate bounds of |y - u| over y in B(u, r) = u.B(0, r)."""
    b = variables(4)
    ufl = tuple(float(v) for v in u)
    y = bch_product(tuple(MultiPoly.const(v, 4).to_float() for v in ufl), b, q.xi)
    bnd = q.bounds(r)
    out = []
    for k, p in enumerate(y):
        acc = 0.0
        for e, c in p.terms.items():
            if any(e):
                acc += abs(float(c)) * math.prod(bnd[i] ** e[i] for i in range(4))
        out.append(acc)
    return np.array(ufl), np.array(out)


def _plane_chart(V, window, xi):
    s, t = variables(2)
    comps = [s * float(V.v[k]) + t * float(V.w[k]) for k in range(4)]
    comps = [c if c.terms else MultiPoly(nvars=2) for c in comps]
    return SurfaceChart(comps, ((window[0], window[1]), (window[2], window[3])), xi, "plane")


class PlaneSlicer:
    """Slices {v in V : d(u, v) <= r} for a fixed plane and norm; reuses the composite basis."""

    def __init__(self, q, V):
        if not isinstance(V, HomogeneousPlane):
            V = HomogeneousPlane(*V)
        self.q = q
        self.V = V
        A = V.as_array()  # rows v, w
        G = A @ A.T
        self.area_factor = float(np.sqrt(np.linalg.det(G)))
        if not self.area_factor > 0:
            raise ValueError("plane vectors are linearly dependent")
        self.A = A
        self.Ginv = np.linalg.inv(G)

    def window(self, u, r):
        u, rad = _translate_bounds(u, self.q, r)
        # y in V: (s, t) = G^-1 A y, bounded by |G^-1| |A| (|u| + rad)
        ybound = np.abs(u) + rad
        st = np.abs(self.Ginv) @ (np.abs(self.A) @ ybound)
        return (-st[0], st[0], -st[1], st[1])

    def region(self, u, r):
        win = self.window(u, r)
        if not (win[1] > 0 and win[3] > 0):
            return None
        chart = _plane_chart(self.V, win, self.q.xi)
        return BallPreimage(chart, Ball(tuple(u), r, self.q), win)

    def area(self, u, r, spec=DEFAULT_SPEC):
        reg = self.region(u, r)
        if reg is None:
            return Estimate(0.0, 0.0, (0.0,), "rows", "degenerate window")
        est = integrate_rows(reg, None, spec)
        f = self.area_factor
        return Estimate(est.value * f, est.error * f, tuple(h * f for h in est.history), est.method, est.note)


def slice_area(q, V, u, r, spec=DEFAULT_SPEC):
    """Lebesgue area (graded scalar product) of {v in V : d(u, v) <= r}."""
    return PlaneSlicer(q, V).area(u, r, spec)


def _unit_ball_point(w, q, r=1.0):
    """Map w in [-1,1]^4 onto the closed ball B(0, r) of the box norm."""
    w = np.clip(np.asarray(w, dtype=float), -1.0, 1.0)
    return np.array([r * w[0], r * w[1], q.kappa3 * r ** 2 * w[2], q.kappa4 * r ** 3 * w[3]])


def _maximize(f, starts_from=(), grid=SEARCH_GRID, starts=SEARCH_STARTS, maxfev=300, coarse=True):
    """Grid scan of [-1,1]^4 plus bounded Nelder-Mead from the best cells; deterministic."""
    cands = [np.asarray(s, dtype=float) for s in starts_from]
    if coarse:
        ax = np.linspace(-1.0, 1.0, grid)
        pts = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), -1).reshape(-1, 4)
        vals = np.array([f(p) for p in pts])
        order = np.lexsort((np.arange(vals.size), -vals))[:starts]
        cands += [pts[i] for i in order]
    best_x, best_v = None, -np.inf
    for x0 in cands:
        val0 = f(x0)
        if val0 > best_v:
            best_x, best_v = np.array(x0), val0
        res = minimize(lambda x: -f(x), x0, method="Nelder-Mead", bounds=[(-1.0, 1.0)] * 4,
                       options={"xatol": 1e-4, "fatol": 1e-9, "maxfev": maxfev,
                                "initial_simplex": _simplex(x0, 0.25)})
        if -res.fun > best_v:
            best_x, best_v = np.clip(res.x, -1, 1), float(-res.fun)
    return best_x, best_v


def _simplex(x0, h):
    x0 = np.asarray(x0, dtype=float)
    pts = [x0]
    for i in range(4):
        p = x0.copy()
        p[i] = p[i] - h if p[i] + h > 1 else p[i] + h
        pts.append(p)
    return np.array(pts)


@dataclass(frozen=True)
class SphericalFactor:
    value: float
    center: tuple
    history: tuple
    delta: float
    plane: HomogeneousPlane

    @property
    def relative_delta(self):
        return self.delta / self.value if self.value else float("inf")


def spherical_factor(q, V, spec=DEFAULT_SPEC):
    """beta(V) = max over ||u|| <= 1 of the area of B(u, 1) sliced by V.

    Each refinement level reruns the local search at a finer row resolution,
    seeded with the previous best center; history holds the per-level maxima.
    """
    slicer = PlaneSlicer(q, V)
    history, best_w = [], None
    for level, n in enumerate(spec.resolutions()):
        sub = QuadratureSpec(n=n, levels=1, gauss=spec.gauss, scan=spec.scan)

        def f(w, sub=sub):
            return slicer.area(_unit_ball_point(w, q), 1.0, sub).value

        seeds = [np.zeros(4)] if best_w is None else [best_w]
        best_w, val = _maximize(f, seeds, coarse=level == 0)
        history.append(val)
    delta = abs(history[-1] - history[-2]) if len(history) > 1 else float("inf")
    center = tuple(float(v) for v in _unit_ball_point(best_w, q))
    return SphericalFactor(history[-1], center, tuple(history), delta, slicer.V)


# ---------------------------------------------------------------- Federer density


@dataclass(frozen=True)
class DensityEstimate:
    radii: tuple
    quotients: tuple
    centered: tuple
    centers: tuple
    limit: float
    error: float
    degree: int
    note: str = ""


def extrapolate(values):
    """Aitken delta-squared on the last three values when monotone, else last value with spread."""
    v = [float(x) for x in values]
    if len(v) < 3:
        return v[-1], (abs(v[-1] - v[-2]) if len(v) == 2 else float("inf")), "too few radii"
    a, b, c = v[-3:]
    d1, d2 = b - a, c - b
    if d1 * d2 > 0 and d2 - d1 != 0:
        lim = c - d2 * d2 / (d2 - d1)
        # only accept when the accelerated value stays in the trend direction
        if (lim - c) * d2 >= 0 and abs(lim - c) <= 10 * abs(d2):
            return lim, abs(lim - c), "aitken"
    spread = max(v[-3:]) - min(v[-3:])
    return c, spread, "last value"


def federer_density(s, u0, N=None, radii=(2.0 ** -2, 2.0 ** -3, 2.0 ** -4), spec=DEFAULT_SPEC, q=DEFAULT_NORM):
    """Per radius, maximize 2^N mu(B(c, r)) / (2r)^N over centers c with d(c, p) <= r."""
    if not s.is_polynomial:
        raise TypeError("federer_density needs a polynomial chart")
    if q.xi != s.xi:
        raise ValueError("norm and chart use different structure coefficients")
    u0 = tuple(float(v) for v in u0)
    if N is None:
        N = surface_degree(s, 17).degree
    p = s.point_array(np.array(u0[0]), np.array(u0[1]))
    p = tuple(float(v) for v in p)
    basis = CompositeBasis(s)
    quots, cents, centers = [], [], []
    for r in radii:
        r = float(r)
        sub = QuadratureSpec(n=spec.n, levels=spec.levels, gauss=spec.gauss, scan=spec.scan)

        def measure(c, sub=sub, r=r):
            reg = BallPreimage(s, Ball(tuple(c), r, q), basis=basis)
            return reg, intrinsic_measure(s, reg, sub, degree=N, seeds=(u0[0],))

        def center(w, r=r):
            off = _unit_ball_point(w, q, r)
            return tuple(float(v) for v in bch_product(p, tuple(off), q.xi))

        reg0, m0 = measure(p)
        if reg0.touches_boundary(sub, (u0[0],)):
            raise DomainError(f"radius {r} exceeds the chart coverage")
        cents.append(m0.value / r ** N)
        search = QuadratureSpec(n=max(8, spec.n // 2), levels=1, gauss=spec.gauss, scan=spec.scan)

        def f(w, r=r):
            reg = BallPreimage(s, Ball(center(w), r, q), basis=basis)
            return intrinsic_measure(s, reg, search, degree=N, seeds=(u0[0],)).value / r ** N

        w, _ = _maximize(f, [np.zeros(4)])
        c = center(w)
        reg, m = measure(c)
        if reg.touches_boundary(sub, (u0[0],)):
            raise DomainError(f"radius {r} exceeds the chart coverage")
        val = max(m.value / r ** N, cents[-1])
        quots.append(val)
        centers.append(c)
    lim, err, note = extrapolate(quots)
    return DensityEstimate(tuple(float(r) for r in radii), tuple(quots), tuple(cents), tuple(centers),
                           float(lim), float(err), int(N), note)


# ---------------------------------------------------------------- blow-ups


def eta_map(t, b):
    """eta(t)_i = |t_i|^b_i sgn(t_i) / b_i."""
    out = []
    for ti, bi in zip(t, b):
        if bi not in (1, 2, 3):
            raise ValueError("induced degrees must lie in {1, 2, 3}")
        if isinstance(ti, np.ndarray):
            out.append(np.sign(ti) * np.abs(ti) ** bi / bi)
        else:
            out.append((abs(ti) ** bi) * (1 if ti > 0 else -1 if ti < 0 else 0) / bi)
    return tuple(out)


@dataclass(frozen=True)
class ExponentFit:
    component: int
    required: int
    slope: float
    residual: float
    slopes: tuple
    lambdas: tuple
    direction: tuple


@dataclass
class GammaReport:
    fits: dict
    graph_indices: tuple
    induced: tuple
    graph_error: float
    angle: float
    xi_new: object
    directions: tuple = field(default=())

    @property
    def worst(self):
        return min(f.slope for f in self.fits.values())


def _fit(logl, logv):
    A = np.vstack([logl, np.ones_like(logl)]).T
    coef, *_ = np.linalg.lstsq(A, logv, rcond=None)
    resid = float(np.max(np.abs(A @ coef - logv)))
    return float(coef[0]), resid


def gamma_expansion(s, u0, directions=8, n_lambda=8, tol=None):
    """Fit decay exponents of Gamma = phi_graph o eta along dilated directions."""
    if n_lambda < 6:
        raise ValueError("need at least 6 dyadic lambda values")
    rep = adapted_frame(s, u0, tol)
    chart = rep.chart
    g = tuple(i - 1 for i in rep.graph_indices)
    b = tuple(WEIGHTS[i] for i in g)
    rho = float(chart.domain[0][1])
    # first dyadic exponent putting every eta(lambda t) well inside the graph domain
    k0 = 1
    while max(1.0 / bi * 2.0 ** (-k0 * bi) for bi in b) >= 0.5 * rho:
        k0 += 1
    lambdas = 2.0 ** -(k0 + np.arange(n_lambda))
    thetas = math.pi / 8 + np.arange(directions) * math.pi / 4
    others = [k for k in range(4) if k not in g]
    per = {k: [] for k in others}
    graph_err = 0.0
    for th in thetas:
        t = (math.cos(th), math.sin(th))
        z = eta_map((lambdas * t[0], lambdas * t[1]), b)
        vals = chart.point_array(z[0], z[1])
        for j, gi in enumerate(g):
            target = np.sign(lambdas * t[j]) * np.abs(lambdas * t[j]) ** b[j] / b[j]
            graph_err = max(graph_err, float(np.max(np.abs(vals[gi] - target))))
        for k in others:
            v = np.abs(vals[k])
            if np.all(v == 0):
                per[k].append((math.inf, 0.0, t))
                continue
            keep = v > 0
            if keep.sum() < 6:
                per[k].append((math.inf, 0.0, t))
                continue
            slope, resid = _fit(np.log2(lambdas[keep]), np.log2(v[keep]))
            per[k].append((slope, resid, t))
    fits = {}
    for k in others:
        worst = min(per[k], key=lambda e: e[0])
        fits[k + 1] = ExponentFit(k + 1, WEIGHTS[k], worst[0], worst[1], tuple(e[0] for e in per[k]),
                                  tuple(float(v) for v in lambdas), worst[2])
    return GammaReport(fits, rep.graph_indices, b, graph_err, rep.angle, rep.xi_new,
                       tuple((math.cos(t), math.sin(t)) for t in thetas))


# ---------------------------------------------------------------- box versus ball


def box_norm(x):
    """Smallest r with x in Box(0, r)."""
    x = np.asarray(x, dtype=float)
    a = np.maximum(np.abs(x[..., 0]), np.abs(x[..., 1]))
    a = np.maximum(a, np.sqrt(np.abs(x[..., 2])))
    return np.maximum(a, np.cbrt(np.abs(x[..., 3])))


def box_ball_lambda(q=DEFAULT_NORM, samples=100_000, seed=0):
    """Largest lambda on a 1/4096 grid with Box(0, lambda) in B(0,1) in Box(0, 1/lambda) on samples."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(samples, 4))
    snap = rng.random((samples, 4)) < 0.3
    w[snap] = np.sign(w[snap])
    box_pts = w  # Box(0, 1); Box(0, lam) is its dilation by lam
    ball_pts = w * np.array([1.0, 1.0, q.kappa3, q.kappa4])  # B(0, 1)
    m1 = float(np.max(q.norm(box_pts)))
    m2 = float(np.max(box_norm(ball_pts)))
    lam = min(1.0, 1.0 / m1, 1.0 / m2)
    return math.floor(lam * LAMBDA_GRID) / LAMBDA_GRID


def verify_sandwich(q, lam, samples=100_000, seed=1):
    """Count sampled violations of Box(0, lam) in B(0,1) in Box(0, 1/lam)."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(samples, 4))
    snap = rng.random((samples, 4)) < 0.3
    w[snap] = np.sign(w[snap])
    inner = w * np.array([lam ** k for k in WEIGHTS])
    bad_in = int(np.sum(q.norm(inner) > 1.0 + 1e-12))
    ball_pts = w * np.array([1.0, 1.0, q.kappa3, q.kappa4])
    bad_out = int(np.sum(box_norm(ball_pts) > 1.0 / lam + 1e-12))
    return bad_in, bad_out


# ---------------------------------------------------------------- divergence at singular points


@dataclass(frozen=True)
class DivergenceReport:
    radii: tuple
    areas: tuple
    beta: float
    area_slope: float
    ratio_slope: float
    errors: tuple

    @property
    def diverges(self):
        # slopes within fitting noise of zero do not count
        return self.ratio_slope < -DIVERGENCE_TOL


def divergence_probe(s, u0, beta, radii=tuple(2.0 ** -k for k in range(3, 10)), spec=DEFAULT_SPEC,
                     q=DEFAULT_NORM):
    """Least-squares log-log slopes of the Riemannian area of phi^-1(B(p, r)) and of area / r^beta."""
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    if q.xi != s.xi:
        raise ValueError("norm and chart use different structure coefficients")
    u0 = tuple(float(v) for v in u0)
    p = tuple(float(v) for v in s.point_array(np.array(u0[0]), np.array(u0[1])))
    basis = CompositeBasis(s)
    areas, errs = [], []
    for r in radii:
        reg = BallPreimage(s, Ball(p, float(r), q), basis=basis)
        if reg.touches_boundary(spec, (u0[0],)):
            raise DomainError(f"radius {r} exceeds the chart domain")
        est = riemannian_area(s, reg, spec, seeds=(u0[0],))
        if not est.value > 0:
            raise ConvergenceError(f"empty ball preimage at radius {r}", est.error)
        areas.append(est.value)
        errs.append(est.error)
    lr = np.log(np.asarray(radii, dtype=float))
    la = np.log(np.asarray(areas))
    slope, _ = _fit(lr, la)
    return DivergenceReport(tuple(float(r) for r in radii), tuple(areas), float(beta), slope,
                            slope - float(beta), tuple(errs))
