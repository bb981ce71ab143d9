"""Row-based quadrature over chart regions, including exact row slices of ball preimages.

For a polynomial chart and a box quasi-norm ball, each row u1 = s of the
preimage is a finite union of t-intervals whose endpoints are roots of
univariate polynomials; the compiled kernel finds them. Rows are integrated
with the midpoint rule in s and Gauss-Legendre inside each t-piece.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .algebra import STANDARD

SUPPORT_SPLIT = 16  # points per refinement round, 4 bits each
SUPPORT_ROUNDS = 12


@dataclass(frozen=True)
class QuadratureSpec:
    n: int = 64
    levels: int = 3
    mc_samples: int = 200_000
    seed: int = 0
    atol: float = 1e-10
    rtol: float = 1e-3
    gauss: int = 6
    scan: int = 64

    def __post_init__(self):
        for name in ("n", "levels", "mc_samples", "gauss", "scan"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.atol < 0 or self.rtol < 0:
            raise ValueError("tolerances must be nonnegative")

    def resolutions(self):
        return [self.n * 2 ** k for k in range(self.levels)]


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    history: tuple = ()
    method: str = "rows"
    note: str = ""

    def converged(self, atol=1e-10, rtol=1e-3):
        return self.error <= atol + rtol * abs(self.value)

    def __float__(self):
        return float(self.value)


def estimate_from_history(history, method, note=""):
    h = tuple(float(v) for v in history)
    err = abs(h[-1] - h[-2]) if len(h) > 1 else float("inf")
    return Estimate(h[-1], err, h, method, note)


# ---------------------------------------------------------------- regions


class Rect:
    def __init__(self, a1, b1, a2, b2):
        self.a1, self.b1, self.a2, self.b2 = (float(v) for v in (a1, b1, a2, b2))

    @property
    def empty(self):
        return not (self.b1 > self.a1 and self.b2 > self.a2)

    def support(self, spec, seeds=()):
        return [] if self.empty else [(self.a1, self.b1)]

    def rows(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= self.a1) & (s <= self.b1)
        st = np.full((s.size, 1), self.a2)
        en = np.where(inside[:, None], self.b2, self.a2)
        return st, en

    def contains(self, u1, u2):
        return (u1 >= self.a1) & (u1 <= self.b1) & (u2 >= self.a2) & (u2 <= self.b2)


class Disk:
    def __init__(self, center, radius):
        self.c1, self.c2 = (float(v) for v in center)
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def support(self, spec, seeds=()):
        return [(self.c1 - self.radius, self.c1 + self.radius)]

    def rows(self, s):
        s = np.asarray(s, dtype=float)
        h = np.sqrt(np.maximum(self.radius ** 2 - (s - self.c1) ** 2, 0.0))
        return (self.c2 - h)[:, None], (self.c2 + h)[:, None]

    def contains(self, u1, u2):
        return (u1 - self.c1) ** 2 + (u2 - self.c2) ** 2 <= self.radius ** 2

    def inside(self, domain):
        (a, b), (c, d) = domain
        r = self.radius
        return a <= self.c1 - r and self.c1 + r <= b and c <= self.c2 - r and self.c2 + r <= d


# basis monomials of the composite (-c).phi: 1, y1, y2, y3, y4, y1^2, y1 y2, y2^2
def composite_matrix(c, xi=STANDARD):
    """Rows give (-c).y as combinations of the 8 basis monomials."""
    x1, x2, x3, x4 = (-float(v) for v in c)
    a, b, g = (float(v) for v in xi.as_tuple())
    K = b * x1 + g * x2
    tw = 1.0 / 12.0
    return np.array([
        [x1, 1, 0, 0, 0, 0, 0, 0],
        [x2, 0, 1, 0, 0, 0, 0, 0],
        [x3, -0.5 * a * x2, 0.5 * a * x1, 1, 0, 0, 0, 0],
        [x4,
         -0.5 * b * x3 - tw * a * K * x2,
         -0.5 * g * x3 + tw * a * K * x1,
         0.5 * (b * x1 + g * x2),
         1,
         tw * a * b * x2,
         tw * a * (g * x2 - b * x1),
         -tw * a * g * x1],
    ], dtype=float)


def _pad(a, shape):
    out = np.zeros(shape)
    out[: a.shape[0], : a.shape[1]] = a
    return out


class CompositeBasis:
    """Dense coefficient arrays of the 8 basis monomials in the chart components."""

    def __init__(self, chart):
        comps = [c.to_float() for c in chart.components]
        dense = [c.to_dense() for c in comps]
        sq = [comps[0] * comps[0], comps[0] * comps[1], comps[1] * comps[1]]
        mats = [np.ones((1, 1))] + dense + [p.to_dense() for p in sq]
        I = max(m.shape[0] for m in mats)
        J = max(m.shape[1] for m in mats)
        self.stack = np.stack([_pad(m, (I, J)) for m in mats])  # (8, I, J)
        self.xi = chart.xi

    def coefficients(self, center):
        M = composite_matrix(center, self.xi)
        return np.tensordot(M, self.stack, axes=(1, 0))  # (4, I, J)


class BallPreimage:
    """phi^{-1}(B(center, r)) inside a window rectangle of the chart domain."""

    def __init__(self, chart, ball, window=None, basis=None):
        self.chart = chart
        self.ball = ball
        if window is None:
            (a, b), (c, d) = chart.domain
            window = (float(a), float(b), float(c), float(d))
        self.window = tuple(float(v) for v in window)
        self.basis = basis if basis is not None else CompositeBasis(chart)
        self.coef = self.basis.coefficients(ball.center)
        self.bounds = np.array(ball.norm.bounds(ball.radius), dtype=float)
        if ball.norm.xi != chart.xi:
            raise ValueError("ball and chart use different structure coefficients")

    def rows(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return kernels.row_intervals(self.coef, self.bounds, s, self.window[2], self.window[3])

    def _lengths(self, s):
        st, en = self.rows(s)
        return np.sum(en - st, axis=1)

    def touches_boundary(self, spec, seeds=()):
        """True when the preimage reaches the window edge (ball not inside the chart)."""
        segs = self.support(spec, seeds)
        if not segs:
            return False
        a1, b1, a2, b2 = self.window
        if segs[0][0] <= a1 or segs[-1][1] >= b1:
            return True
        s = np.concatenate([np.linspace(lo, hi, 33) for lo, hi in segs])
        st, en = self.rows(s)
        nz = en > st
        return bool(np.any(nz & (st <= a2)) or np.any(nz & (en >= b2)))

    def support(self, spec, seeds=()):
        a1, b1 = self.window[0], self.window[1]
        grid = np.linspace(a1, b1, spec.scan + 1)
        extra = [float(s) for s in seeds if a1 <= float(s) <= b1]
        grid = np.unique(np.concatenate([grid, extra]))
        ne = self._lengths(grid) > 0
        if not np.any(ne):
            return []
        idx = np.flatnonzero(ne)
        # runs of consecutive nonempty grid points
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate([[idx[0]], idx[breaks + 1]])
        ends = np.concatenate([idx[breaks], [idx[-1]]])
        # bracket each boundary: (empty side, nonempty side)
        lo_out, lo_in, hi_in, hi_out = [], [], [], []
        for i0, i1 in zip(starts, ends):
            lo_in.append(grid[i0])
            lo_out.append(grid[i0 - 1] if i0 > 0 else np.nan)
            hi_in.append(grid[i1])
            hi_out.append(grid[i1 + 1] if i1 + 1 < grid.size else np.nan)
        lo_in, lo_out = np.array(lo_in), np.array(lo_out)
        hi_in, hi_out = np.array(hi_in), np.array(hi_out)
        lo_fix = np.isnan(lo_out)
        hi_fix = np.isnan(hi_out)
        lo_out = np.where(lo_fix, lo_in, lo_out)
        hi_out = np.where(hi_fix, hi_in, hi_out)
        # brackets (a, b) with a on the known side; all edges refined in one batch
        a = np.concatenate([lo_out, hi_in])
        b = np.concatenate([lo_in, hi_out])
        a_state = np.concatenate([np.zeros(lo_out.size, bool), np.ones(hi_in.size, bool)])
        frac = np.arange(1, SUPPORT_SPLIT) / SUPPORT_SPLIT
        for _ in range(SUPPORT_ROUNDS):
            pts = a[:, None] + (b - a)[:, None] * frac
            ne = (self._lengths(pts.ravel()) > 0).reshape(pts.shape)
            flip = ne != a_state[:, None]
            j = np.where(flip.any(axis=1), flip.argmax(axis=1), frac.size)
            grid_ab = np.concatenate([a[:, None], pts, b[:, None]], axis=1)
            rows = np.arange(a.size)
            a, b = grid_ab[rows, j], grid_ab[rows, j + 1]
        k = lo_out.size
        lo_out, hi_out = a[:k], b[k:]
        lo = np.where(lo_fix, a1, lo_out)
        hi = np.where(hi_fix, b1, hi_out)
        return [(float(x), float(y)) for x, y in zip(lo, hi) if y > x]


# ---------------------------------------------------------------- integration


_GL_CACHE = {}


def _gauss(m):
    if m not in _GL_CACHE:
        _GL_CACHE[m] = np.polynomial.legendre.leggauss(m)
    return _GL_CACHE[m]


def _row_values(region, s, weight, m, panels=1):
    st, en = region.rows(s)
    if weight is None:
        return np.sum(en - st, axis=1)
    x, w = _gauss(m)
    # composite rule: each t-piece split into equal panels
    x = ((np.arange(panels)[:, None] + 0.5 * (x + 1.0)) / panels).ravel()
    w = np.tile(w, panels) / panels
    half = 0.5 * (en - st)
    T = st[..., None] + 2.0 * half[..., None] * x
    S = np.broadcast_to(np.asarray(s, dtype=float)[:, None, None], T.shape)
    f = weight(S, T)
    vals = np.sum(f * w, axis=-1) * half
    return np.sum(vals, axis=1)


def integrate_rows(region, weight, spec, seeds=(), segments=None):
    """Midpoint rule in s, composite Gauss in t; both refined together spec.levels times."""
    segs = region.support(spec, seeds) if segments is None else segments
    if not segs:
        return Estimate(0.0, 0.0, (0.0,) * spec.levels, "rows", "empty region")
    total = sum(hi - lo for lo, hi in segs)
    history = []
    for level, n in enumerate(spec.resolutions()):
        acc = []
        for lo, hi in segs:
            k = max(2, int(round(n * (hi - lo) / total)))
            h = (hi - lo) / k
            s = lo + h * (np.arange(k) + 0.5)
            acc.append(h * np.sum(_row_values(region, s, weight, spec.gauss, 2 ** level)))
        history.append(float(np.sum(acc)))
    return estimate_from_history(history, "rows")


def integrate_polar(disk, weight, spec):
    """Midpoint in radius, uniform (periodic) rule in angle."""
    history = []
    for n in spec.resolutions():
        h = disk.radius / n
        rho = h * (np.arange(n) + 0.5)
        th = 2 * np.pi * (np.arange(2 * n) + 0.5) / (2 * n)
        R, TH = np.meshgrid(rho, th, indexing="ij")
        u1 = disk.c1 + R * np.cos(TH)
        u2 = disk.c2 + R * np.sin(TH)
        f = weight(u1, u2) * R
        history.append(float(np.sum(f) * h * (2 * np.pi / (2 * n))))
    return estimate_from_history(history, "polar")


def integrate_mc(contains, weight, window, spec):
    """Plain Monte Carlo over a rectangle; error is the standard error."""
    a1, b1, a2, b2 = window
    rng = np.random.default_rng(spec.seed)
    area = (b1 - a1) * (b2 - a2)
    n = spec.mc_samples
    u1 = rng.uniform(a1, b1, n)
    u2 = rng.uniform(a2, b2, n)
    inside = contains(u1, u2)
    f = np.zeros(n)
    if np.any(inside):
        f[inside] = 1.0 if weight is None else weight(u1[inside], u2[inside])
    val = area * float(np.mean(f))
    err = area * float(np.std(f)) / np.sqrt(n)
    return Estimate(val, err, (val,), "mc")
