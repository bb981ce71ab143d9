"""Left invariant frames, coframes, polynomial differential forms, box quasi-norms."""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .algebra import (
    STANDARD,
    AlgebraElement,
    StructureCoefficients,
    bch_product,
    basis_vector,
)
from .poly import WEIGHTS, MultiPoly, variables


class PolyVectorField(NamedTuple):
    """Coefficients over d/dy1 .. d/dy4."""

    a1: MultiPoly
    a2: MultiPoly
    a3: MultiPoly
    a4: MultiPoly

    def at(self, y):
        return tuple(c(*y) for c in self)

    def apply(self, f):
        """Directional derivative of the polynomial f along the field."""
        out = MultiPoly(nvars=f.nvars)
        for i, c in enumerate(self):
            if c:
                out = out + c * f.diff(i)
        return out


def lie_bracket(X, Y):
    comps = []
    for l in range(4):
        comps.append(X.apply(Y[l]) - Y.apply(X[l]))
    return PolyVectorField(*comps)


# ---------------------------------------------------------------- frames


@lru_cache(maxsize=64)
def frame_fields(xi=STANDARD):
    """Left invariant fields d/dt (y . t e_j) at t=0, derived from the group law."""
    # five variables: y1..y4 and the flow time t
    y = variables(5)
    t = y[4]
    ypt = AlgebraElement(*y[:4])
    fields = []
    for j in range(1, 5):
        e = basis_vector(j)
        moved = bch_product(ypt, AlgebraElement(*(t * c for c in e)), xi)
        comps = []
        for c in moved:
            dc = c.diff(4)
            # drop t: evaluate at t = 0, back to four variables
            comps.append(_restrict4(dc))
        fields.append(PolyVectorField(*comps))
    return tuple(fields)


def _restrict4(p):
    terms = {}
    for e, c in p.terms.items():
        if e[4] == 0:
            terms[e[:4]] = c
    return MultiPoly(terms, 4)


@lru_cache(maxsize=64)
def printed_frame_fields(xi=STANDARD):
    """The same frame typed in from its closed form (kept as a transcription check)."""
    y1, y2, y3, y4 = variables(4)
    a, b, c = xi.xi12, xi.xi13, xi.xi23
    h, tw = Fraction(1, 2), Fraction(1, 12)
    zero, one = MultiPoly(nvars=4), MultiPoly.const(1)
    Y1 = PolyVectorField(one, zero, -h * a * y2, -(h * b * y3 + tw * a * b * y1 * y2 + tw * a * c * y2 ** 2))
    Y2 = PolyVectorField(zero, one, h * a * y1, -(h * c * y3 - tw * a * c * y2 * y1 - tw * a * b * y1 ** 2))
    Y3 = PolyVectorField(zero, zero, one, h * (b * y1 + c * y2))
    Y4 = PolyVectorField(zero, zero, zero, one)
    return (Y1, Y2, Y3, Y4)


def frame_flow(j, y0, t, xi=STANDARD, rtol=1e-12, atol=1e-14):
    """Integrate dy/ds = Y_j(y) from y0 for time t (1-based j)."""
    from scipy.integrate import solve_ivp

    field = [c.to_float() for c in frame_fields(xi)[j - 1]]

    def rhs(_s, y):
        return [float(c(*y)) for c in field]

    sol = solve_ivp(rhs, (0.0, float(t)), [float(v) for v in y0], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return tuple(float(v) for v in sol.y[:, -1])


def frame_matrix(xi=STANDARD):
    """A[j][l] = coefficient of d/dy_l in Y_j (upper unitriangular)."""
    return tuple(tuple(f) for f in frame_fields(xi))


def unitriangular_inverse(L):
    """Inverse of a lower unitriangular matrix over any commutative ring."""
    n = len(L)
    one = L[0][0]
    zero = one - one
    B = [[zero] * n for _ in range(n)]
    for i in range(n):
        if L[i][i] != 1:
            raise ValueError("matrix is not unitriangular")
        B[i][i] = one
        for j in range(i - 1, -1, -1):
            acc = zero
            for k in range(j, i):
                acc = acc + L[i][k] * B[k][j]
            B[i][j] = -acc
    return B


@lru_cache(maxsize=64)
def coframe_matrix(xi=STANDARD):
    """B[k][l] = coefficient of dy_l in theta_k, B = (A^T)^{-1}."""
    A = frame_matrix(xi)
    L = [[A[j][l] for j in range(4)] for l in range(4)]  # transpose, lower unitriangular
    return tuple(tuple(row) for row in unitriangular_inverse(L))


# ---------------------------------------------------------------- forms


class Form:
    """Polynomial k-form: {increasing 0-based index tuple: MultiPoly coefficient}."""

    __slots__ = ("k", "nvars", "coeffs")

    def __init__(self, k, coeffs=None, nvars=4):
        self.k = k
        self.nvars = nvars
        self.coeffs = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != k:
                raise ValueError(f"index {idx} does not fit a {k}-form")
            if any(not 0 <= i < nvars for i in idx):
                raise ValueError(f"index {idx} out of range for {nvars} variables")
            sign, idx = _sort_sign(idx)
            if sign == 0:
                continue
            if not isinstance(c, MultiPoly):
                c = MultiPoly.const(c, nvars)
            prev = self.coeffs.get(idx)
            new = sign * c if prev is None else prev + sign * c
            if new.is_zero():
                self.coeffs.pop(idx, None)
            else:
                self.coeffs[idx] = new

    @classmethod
    def one_form(cls, coeffs, nvars=4):
        """From a sequence of coefficients over dy_1..dy_n."""
        return cls(1, {(i,): c for i, c in enumerate(coeffs)}, nvars)

    @classmethod
    def function(cls, f):
        return cls(0, {(): f}, f.nvars)

    def coefficient(self, *idx):
        sign, key = _sort_sign(tuple(idx))
        if sign == 0 or key not in self.coeffs:
            return MultiPoly(nvars=self.nvars)
        return sign * self.coeffs[key]

    def __add__(self, other):
        if other.k != self.k:
            raise ValueError("cannot add forms of different degree")
        merged = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            merged[idx] = merged[idx] + c if idx in merged else c
        return Form(self.k, merged, self.nvars)

    def __neg__(self):
        return Form(self.k, {i: -c for i, c in self.coeffs.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return Form(self.k, {i: c * s for i, c in self.coeffs.items()}, self.nvars)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self.k == other.k and self.coeffs == other.coeffs

    def is_zero(self):
        return not self.coeffs

    def __repr__(self):
        if not self.coeffs:
            return f"Form{self.k}(0)"
        parts = []
        for idx in sorted(self.coeffs):
            basis = "^".join(f"dy{i + 1}" for i in idx)
            parts.append(f"({self.coeffs[idx]}){basis}")
        return " + ".join(parts)

    def wedge(self, other):
        out = {}
        for i1, c1 in self.coeffs.items():
            for i2, c2 in other.coeffs.items():
                sign, idx = _sort_sign(i1 + i2)
                if sign == 0:
                    continue
                v = sign * (c1 * c2)
                out[idx] = out[idx] + v if idx in out else v
        return Form(self.k + other.k, out, self.nvars)

    def d(self):
        out = {}
        for idx, c in self.coeffs.items():
            for m in range(self.nvars):
                dc = c.diff(m)
                if dc.is_zero():
                    continue
                sign, key = _sort_sign((m,) + idx)
                if sign == 0:
                    continue
                v = sign * dc
                out[key] = out[key] + v if key in out else v
        return Form(self.k + 1, out, self.nvars)

    def pullback(self, phi):
        """Pull back along a polynomial map given as nvars polynomials in the new variables."""
        m = phi[0].nvars
        dphi = [[p.diff(a) for a in range(m)] for p in phi]
        out = {}
        for idx, c in self.coeffs.items():
            cc = c(*phi)
            if not isinstance(cc, MultiPoly):
                cc = MultiPoly.const(cc, m)
            for targets in combinations(range(m), self.k):
                det = _minor(dphi, idx, targets, m)
                if det.is_zero():
                    continue
                v = cc * det
                out[targets] = out[targets] + v if targets in out else v
        return Form(self.k, out, m)

    def pair(self, *fields):
        """Evaluate on k vector fields (each a sequence of nvars polynomials)."""
        if len(fields) != self.k:
            raise ValueError("wrong number of vector fields")
        total = MultiPoly(nvars=self.nvars)
        for idx, c in self.coeffs.items():
            total = total + c * _minor(list(zip(*fields)), idx, range(self.k), self.nvars)
        return total


def _minor(mat, rows, cols, nvars):
    """Determinant of the sub-matrix mat[rows][cols]."""
    sub = [[mat[r][c] for c in cols] for r in rows]
    return _det(sub, len(sub), nvars)


def _det(m, k, nvars=4):
    if k == 0:
        return MultiPoly.const(1, nvars)
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for c in range(k):
        sub = [row[:c] + row[c + 1:] for row in m[1:]]
        term = m[0][c] * _det(sub, k - 1, nvars)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    return total


def _sort_sign(idx):
    if len(set(idx)) != len(idx):
        return 0, None
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def coframe_forms(xi=STANDARD):
    """theta_1..theta_4 as exact polynomial 1-forms (solved from the frame)."""
    B = coframe_matrix(xi)
    return tuple(Form.one_form(row) for row in B)


def printed_theta4(xi=STANDARD):
    """theta_4 typed from its closed form; must coincide with the solved one."""
    y1, y2, y3, y4 = variables(4)
    a, b, c = xi.xi12, xi.xi13, xi.xi23
    h, s = Fraction(1, 2), Fraction(1, 6)
    return Form.one_form([
        h * b * y3 - s * a * y2 * (b * y1 + c * y2),
        s * a * y1 * (c * y2 + b * y1) + h * c * y3,
        -h * (b * y1 + c * y2),
        MultiPoly.const(1),
    ])


def exterior_derivative(omega):
    return omega.d()


def express_in_coframe(omega, xi=STANDARD):
    """Coefficients of a 2-form on theta_i ^ theta_j, i<j (0-based keys)."""
    A = frame_matrix(xi)
    out = {}
    for i, j in combinations(range(4), 2):
        v = omega.pair(A[i], A[j])
        if not v.is_zero():
            out[(i, j)] = v
    return out


# ---------------------------------------------------------------- metric


def inner_product(v, w):
    return sum(a * b for a, b in zip(v, w))


def two_vector_norm(c):
    return float(np.sqrt(sum(float(a) ** 2 for a in c)))


@dataclass(frozen=True)
class QuasiNorm:
    """Box-type homogeneous quasi-norm

    ||x|| = max(|x1|, |x2|, (|x3|/kappa3)^(1/2), (|x4|/kappa4)^(1/3)).
    """

    kappa3: float = 1.0
    kappa4: float = 0.5
    xi: StructureCoefficients = STANDARD

    def __post_init__(self):
        if not (self.kappa3 > 0 and self.kappa4 > 0):
            raise ValueError("kappa constants must be positive")

    def norm(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 4:
            raise ValueError("last axis must have 4 components")
        a = np.maximum(np.abs(x[..., 0]), np.abs(x[..., 1]))
        a = np.maximum(a, np.sqrt(np.abs(x[..., 2]) / self.kappa3))
        a = np.maximum(a, np.cbrt(np.abs(x[..., 3]) / self.kappa4))
        return a if a.ndim else float(a)

    def norm_sixth(self, x):
        """||x||^6 computed without roots (exact for rational input and kappas)."""
        k3, k4 = Fraction(self.kappa3), Fraction(self.kappa4)
        x1, x2, x3, x4 = x
        return max(Fraction(x1) ** 6, Fraction(x2) ** 6,
                   (abs(Fraction(x3)) / k3) ** 3, (abs(Fraction(x4)) / k4) ** 2)

    def distance(self, x, y):
        from .kernels import bch_quasinorm

        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        d = bch_quasinorm(-x, y, self)
        return d if d.size > 1 else float(d[0])

    def bounds(self, r):
        """Per-coordinate bounds of the ball B(0, r)."""
        return (r, r, self.kappa3 * r * r, self.kappa4 * r ** 3)


DEFAULT_NORM = QuasiNorm()


def quasi_norm(q, x):
    return q.norm(np.asarray(tuple(x), dtype=float))


def distance(q, x, y):
    return q.distance(tuple(x), tuple(y))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float
    norm: QuasiNorm = DEFAULT_NORM

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def contains(self, x):
        from .kernels import bch_quasinorm

        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 4)
        c = np.broadcast_to(-np.asarray(self.center), flat.shape)
        d = bch_quasinorm(c, flat, self.norm)
        return (d <= self.radius).reshape(x.shape[:-1])

    @property
    def diameter(self):
        return 2.0 * self.radius


@dataclass(frozen=True)
class Box:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        r = self.radius
        ok = np.ones(x.shape[:-1], dtype=bool)
        for i, w in enumerate(WEIGHTS):
            ok &= np.abs(x[..., i]) <= r ** w
        return ok


def box(r):
    return Box(r)


def sample_unit_ball(rng, n, q, snap=0.0):
    """Points of B(0,1) for the box norm: (w1, w2, k3 w3, k4 w4), w uniform in [-1,1]^4.

    With snap > 0 each coordinate is pushed to +-1 with that probability,
    which concentrates samples on the faces where extremes live.
    """
    w = rng.uniform(-1.0, 1.0, size=(n, 4))
    if snap > 0:
        m = rng.random((n, 4)) < snap
        w[m] = np.sign(w[m])
    w[:, 2] *= q.kappa3
    w[:, 3] *= q.kappa4
    return w


def dilate_array(r, x):
    r = np.asarray(r, dtype=float)[..., None]
    return x * r ** np.asarray(WEIGHTS, dtype=float)


def triangle_defect_sampler(q, n, seed=0, batch=100_000):
    """max over sampled pairs of ||x.y|| - (||x|| + ||y||); <= 0 means no violation found."""
    from .kernels import bch_quasinorm

    if n < 1:
        raise ValueError("need at least one sample")
    streams = np.random.SeedSequence(seed).spawn((n + batch - 1) // batch)
    worst = -np.inf
    done = 0
    for ss in streams:
        m = min(batch, n - done)
        rng = np.random.default_rng(ss)
        x = sample_unit_ball(rng, m, q, snap=0.3)
        y = sample_unit_ball(rng, m, q, snap=0.3)
        # spread the norm ratio; common scale is irrelevant by homogeneity
        rho = 2.0 ** rng.uniform(-4, 4, size=m)
        y = dilate_array(rho, y)
        s = 1.0 / np.maximum(1.0, rho)
        x = dilate_array(s, x)
        y = dilate_array(s, y)
        lhs = bch_quasinorm(x, y, q)
        rhs = q.norm(x) + q.norm(y)
        worst = max(worst, float(np.max(lhs - rhs)))
        done += m
    return worst


def diameter_check(q, r=1.0, n=20_000, seed=0):
    """Largest sampled distance between two points of B(0,r) divided by 2r, plus the witness."""
    rng = np.random.default_rng(seed)
    x = sample_unit_ball(rng, n, q, snap=0.5)
    y = sample_unit_ball(rng, n, q, snap=0.5)
    x = dilate_array(np.full(n, r), x)
    y = dilate_array(np.full(n, r), y)
    d = q.distance(x, y)
    e = np.array([[r, 0, 0, 0]])
    witness = float(q.distance(e, -e))
    return max(float(np.max(d)), witness) / (2 * r), witness / (2 * r)
