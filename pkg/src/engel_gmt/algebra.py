"""Engel Lie algebra / group in exponential coordinates of a graded basis.

Components are duck typed: Fraction for exact identity checks, float or
numpy arrays for quadrature, MultiPoly for symbolic frame derivations.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from .poly import WEIGHTS

Rational = Fraction

ZERO_TOL = 1e-9

# index pairs (i, j), 1-based, in the fixed order used for every 2-vector
PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


@dataclass(frozen=True)
class StructureCoefficients:
    """Brackets [Y1,Y2] = xi12 Y3, [Y1,Y3] = xi13 Y4, [Y2,Y3] = xi23 Y4."""

    xi12: Any = Fraction(1)
    xi13: Any = Fraction(1)
    xi23: Any = Fraction(0)

    def __post_init__(self):
        for name in ("xi12", "xi13", "xi23"):
            v = getattr(self, name)
            if isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, name, Fraction(v))
        if self.xi12 == 0:
            raise ValueError("xi12 must be nonzero")
        if self.xi13 == 0 and self.xi23 == 0:
            raise ValueError("xi13 and xi23 cannot both vanish")

    @property
    def exact(self):
        return all(isinstance(v, Fraction) for v in self.as_tuple())

    def as_tuple(self):
        return (self.xi12, self.xi13, self.xi23)

    def to_float(self):
        return StructureCoefficients(*(float(v) for v in self.as_tuple()))


STANDARD = StructureCoefficients(Fraction(1), Fraction(1), Fraction(0))


class AlgebraElement(NamedTuple):
    c1: Any
    c2: Any
    c3: Any
    c4: Any

    def __neg__(self):
        return AlgebraElement(-self.c1, -self.c2, -self.c3, -self.c4)

    def __add__(self, other):
        return AlgebraElement(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        return AlgebraElement(*(a - b for a, b in zip(self, other)))

    def scale(self, s):
        return AlgebraElement(*(s * a for a in self))

    def to_float(self):
        return AlgebraElement(*(float(a) for a in self))


def element(*c):
    """Build an AlgebraElement, promoting ints to Fraction."""
    if len(c) == 1:
        c = tuple(c[0])
    if len(c) != 4:
        raise ValueError("an Engel element has 4 components")
    return AlgebraElement(*(Fraction(v) if isinstance(v, int) else v for v in c))


def basis_vector(j):
    """e_j, 1-based."""
    return element(*[1 if i == j else 0 for i in range(1, 5)])


def _numeric(*vals):
    return any(isinstance(v, (float, np.ndarray, np.floating)) for v in vals)


def _coeffs_for(xi, *vals):
    # Fraction * ndarray gives object arrays, so drop to floats for numeric input
    if _numeric(*vals) and xi.exact:
        return xi.to_float()
    return xi


def bracket(x, y, xi=STANDARD):
    xi = _coeffs_for(xi, *x, *y)
    x1, x2, x3, _ = x
    y1, y2, y3, _ = y
    out3 = xi.xi12 * (x1 * y2 - x2 * y1)
    out4 = xi.xi13 * (x1 * y3 - x3 * y1) + xi.xi23 * (x2 * y3 - x3 * y2)
    zero = out3 * 0
    return AlgebraElement(zero, zero, out3, out4)


def bch_product(x, y, xi=STANDARD):
    """Group law x.y, the BCH series cut after step 3."""
    x = AlgebraElement(*x)
    y = AlgebraElement(*y)
    xi = _coeffs_for(xi, *x, *y)
    xy = bracket(x, y, xi)
    if _numeric(*x, *y):
        half, twelfth = 0.5, 1.0 / 12.0
    else:
        half, twelfth = Fraction(1, 2), Fraction(1, 12)
    a = bracket(x, xy, xi)
    b = bracket(y, -xy, xi)
    return AlgebraElement(
        x.c1 + y.c1,
        x.c2 + y.c2,
        x.c3 + y.c3 + half * xy.c3,
        x.c4 + y.c4 + half * xy.c4 + twelfth * (a.c4 + b.c4),
    )


def inverse(x):
    return -AlgebraElement(*x)


def dilate(r, x):
    if not r > 0:
        raise ValueError("dilation factor must be positive")
    return AlgebraElement(*(r ** w * c for w, c in zip(WEIGHTS, x)))


def degree_of_multiindex(i, j=None):
    if j is None:
        i, j = i
    if not (1 <= i < j <= 4):
        raise ValueError(f"need 1 <= i < j <= 4, got ({i}, {j})")
    return WEIGHTS[i - 1] + WEIGHTS[j - 1]


PAIR_DEGREES = tuple(degree_of_multiindex(p) for p in PAIRS)


class FrameTwoVector(NamedTuple):
    """Coefficients of a 2-vector on Y_i ^ Y_j, pairs ordered as PAIRS."""

    c12: Any
    c13: Any
    c14: Any
    c23: Any
    c24: Any
    c34: Any

    def by_pair(self):
        return dict(zip(PAIRS, self))

    def degrees(self):
        return dict(zip(PAIRS, PAIR_DEGREES))

    def to_float(self):
        return FrameTwoVector(*(float(c) for c in self))


def is_zero(v, scale=0.0, tol=None):
    """Exact zero test for rationals, relative tolerance for floats."""
    if isinstance(v, (int, Fraction)):
        return v == 0
    tol = ZERO_TOL if tol is None else tol
    return abs(v) < tol * (1.0 + scale)


def two_vector_degree(c, tol=None):
    c = FrameTwoVector(*c)
    exact = all(isinstance(v, (int, Fraction)) for v in c)
    scale = 0.0 if exact else float(np.sqrt(sum(float(v) ** 2 for v in c)))
    deg = 0
    for d, v in zip(PAIR_DEGREES, c):
        if not is_zero(v, scale, tol):
            deg = max(deg, d)
    if deg == 0:
        raise ValueError("zero 2-vector has no degree")
    return deg


def vector_degree(v, tol=None):
    """Degree of a 1-vector: largest weight among nonzero frame components."""
    exact = all(isinstance(a, (int, Fraction)) for a in v)
    scale = 0.0 if exact else float(np.sqrt(sum(float(a) ** 2 for a in v)))
    deg = 0
    for w, a in zip(WEIGHTS, v):
        if not is_zero(a, scale, tol):
            deg = max(deg, w)
    if deg == 0:
        raise ValueError("zero vector has no degree")
    return deg
