"""Engel group geometric measure theory toolkit."""
from .algebra import (
    PAIRS,
    STANDARD,
    AlgebraElement,
    FrameTwoVector,
    Rational,
    StructureCoefficients,
    bch_product,
    bracket,
    degree_of_multiindex,
    dilate,
    element,
    inverse,
    two_vector_degree,
)
from .poly import MultiPoly

__version__ = "0.1.0"
