"""Sparse multivariate polynomials with exact rational coefficients.

Terms live in a dict mapping exponent tuples to coefficients. Integer
coefficients are promoted to Fraction so arithmetic stays exact; float
coefficients are allowed (numeric mode) and simply propagate.
"""
from fractions import Fraction
from numbers import Number

import numpy as np

WEIGHTS = (1, 1, 2, 3)


def _coerce(c):
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, (Fraction, float)):
        return c
    if isinstance(c, np.floating):
        return float(c)
    if isinstance(c, np.integer):
        return Fraction(int(c))
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class MultiPoly:
    """Polynomial in ``nvars`` variables.

    >>> x, y = MultiPoly.var(0, 2), MultiPoly.var(1, 2)
    >>> str((x + y) ** 2)
    'x1^2 + 2*x1*x2 + x2^2'
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, terms=None, nvars=4):
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(k) for k in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} does not have {nvars} entries")
                if any(k < 0 for k in e):
                    raise ValueError(f"negative exponent in {e}")
                c = _coerce(c)
                if c != 0:
                    clean[e] = clean.get(e, 0) + c
                    if clean[e] == 0:
                        del clean[e]
        self.terms = clean

    # constructors
    @classmethod
    def const(cls, c, nvars=4):
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def var(cls, i, nvars=4):
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1}, nvars)

    @classmethod
    def _raw(cls, terms, nvars):
        # trusted path: terms already clean
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (Number, np.number)):
            return MultiPoly.const(other, self.nvars)
        return NotImplemented

    # arithmetic
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
        return MultiPoly._raw(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw({e: -c for e, c in self.terms.items()}, self.nvars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)) and not isinstance(other, MultiPoly):
            c = _coerce(other)
            if c == 0:
                return MultiPoly._raw({}, self.nvars)
            return MultiPoly._raw({e: v * c for e, v in self.terms.items()}, self.nvars)
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v == 0:
                    out.pop(e, None)
                else:
                    out[e] = v
        return MultiPoly._raw(out, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            raise TypeError("polynomial division is not supported")
        c = _coerce(other)
        if isinstance(c, Fraction):
            return self * (1 / c)
        return self * (1.0 / c)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = MultiPoly.const(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (Number, np.number)) and not isinstance(other, MultiPoly):
            other = MultiPoly.const(other, self.nvars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"MultiPoly({self!s})"

    def __str__(self):
        return self.to_string()

    # calculus / evaluation
    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = out.get(ne, 0) + c * k
        return MultiPoly._raw({e: c for e, c in out.items() if c != 0}, self.nvars)

    def __call__(self, *args):
        """Evaluate at a point. Arguments may be numbers, arrays or polynomials."""
        if len(args) == 1 and isinstance(args[0], (tuple, list)) and self.nvars != 1:
            args = tuple(args[0])
        if len(args) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments, got {len(args)}")
        if not self.terms:
            a0 = args[0]
            if isinstance(a0, MultiPoly):
                return MultiPoly._raw({}, a0.nvars)
            if isinstance(a0, np.ndarray):
                return np.zeros(np.broadcast(*args).shape)
            return Fraction(0) if all(isinstance(a, (int, Fraction)) for a in args) else 0.0
        powers = [dict() for _ in range(self.nvars)]

        def pw(i, k):
            cache = powers[i]
            if k not in cache:
                cache[k] = args[i] ** k if k > 1 else args[i]
            return cache[k]

        numeric = any(isinstance(a, (float, np.ndarray, np.floating)) for a in args)
        total = None
        # fixed term order keeps float evaluation reproducible
        for e in sorted(self.terms):
            term = self.terms[e]
            if numeric:
                term = float(term)
            for i, k in enumerate(e):
                if k:
                    term = pw(i, k) * term
            total = term if total is None else total + term
        # constant pieces must still come back in the argument's type
        if any(isinstance(a, np.ndarray) for a in args):
            shape = np.broadcast(*args).shape
            if not isinstance(total, np.ndarray) or total.shape != shape:
                total = np.broadcast_to(total, shape).astype(float)
        else:
            polys = [a for a in args if isinstance(a, MultiPoly)]
            if polys and not isinstance(total, MultiPoly):
                total = MultiPoly.const(total, polys[0].nvars)
        return total

    def compose(self, polys):
        """Substitute polynomials for the variables."""
        return self(*polys)

    def map_coeffs(self, f):
        return MultiPoly({e: f(c) for e, c in self.terms.items()}, self.nvars)

    def to_float(self):
        return self.map_coeffs(float)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def weighted_degree(self, weights=WEIGHTS):
        """Largest weighted degree of a monomial; -1 for the zero polynomial."""
        return max((sum(w * k for w, k in zip(weights, e)) for e in self.terms), default=-1)

    def is_weighted_homogeneous(self, degree, weights=WEIGHTS):
        return all(sum(w * k for w, k in zip(weights, e)) == degree for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def coefficient(self, exponent):
        return self.terms.get(tuple(exponent), Fraction(0))

    def to_dense(self):
        """Dense coefficient array (two-variable polynomials only) with a[i, j] for u1^i u2^j."""
        if self.nvars != 2:
            raise ValueError("dense form only for two variables")
        d1 = max((e[0] for e in self.terms), default=0)
        d2 = max((e[1] for e in self.terms), default=0)
        a = np.zeros((d1 + 1, d2 + 1))
        for (i, j), c in self.terms.items():
            a[i, j] = float(c)
        return a

    def to_string(self, names=None):
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        # graded lex, highest total degree first
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = _fmt(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt(a)}*{mono}"
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(("- " if neg else "+ ") + body)
        return " ".join(parts)


def _fmt(c):
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(c)


def variables(nvars=4):
    return tuple(MultiPoly.var(i, nvars) for i in range(nvars))
