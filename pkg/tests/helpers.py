"""Deterministic random generators shared by the tests."""
import random
from fractions import Fraction

from hypothesis import strategies as st

from engel_gmt.algebra import AlgebraElement, StructureCoefficients
from engel_gmt.poly import MultiPoly
from engel_gmt.surfaces import SurfaceChart


def rational(rng, num=9, den=9):
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def element(rng):
    return AlgebraElement(*(rational(rng) for _ in range(4)))


def structure(rng):
    while True:
        a, b, c = rational(rng), rational(rng), rational(rng)
        if a != 0 and (b != 0 or c != 0):
            return StructureCoefficients(a, b, c)


def poly2(rng, deg=3, density=0.6, num=6, den=4):
    terms = {}
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            if rng.random() < density:
                terms[(i, j)] = Fraction(rng.randint(-num, num), rng.randint(1, den))
    return MultiPoly(terms, 2)


def chart(rng, deg=3, xi=None):
    return SurfaceChart([poly2(rng, deg) for _ in range(4)], xi=xi or StructureCoefficients(1, 1, 0))


def rng(seed):
    return random.Random(seed)


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=30)
elements = st.tuples(rationals, rationals, rationals, rationals).map(lambda t: AlgebraElement(*t))
nonzero = rationals.filter(lambda v: v != 0)
structures = st.tuples(nonzero, rationals, rationals).filter(lambda t: t[1] != 0 or t[2] != 0).map(
    lambda t: StructureCoefficients(*t))
