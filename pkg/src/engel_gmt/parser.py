"""Recursive-descent parser for polynomial expressions in u1, u2 with exact rational literals.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | IDENT | '(' expr ')'

Division is allowed only by nonzero constants, so "1/2*u1" and "u1/3" both work.
Decimals are converted exactly (0.25 -> 1/4).
"""
import re
from fractions import Fraction

from .errors import EngelError
from .poly import MultiPoly

VARIABLES = ("u1", "u2")
MAX_EXPONENT = 64

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()])"
)


class ParseError(EngelError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


def _tokenize(text):
    out = []
    pos, line, col0 = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind != "ws":
            out.append((kind, m.group(), line, pos - col0 + 1))
        pos = m.end()
    out.append(("end", "", line, pos - col0 + 1))
    return out


def _literal(tok):
    _, text, line, col = tok
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"malformed literal {text!r}", line, col) from None


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = {v: k for k, v in enumerate(variables)}
        self.nvars = len(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, text):
        tok = self.peek()
        if tok[1] != text or tok[0] != "op":
            self.fail(f"expected {text!r}, found {tok[1] or 'end of input'!r}")
        return self.take()

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        out = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op_tok = self.take()
            rhs = self.unary()
            if op_tok[1] == "*":
                acc = acc * rhs
            else:
                if rhs.degree() > 0:
                    self.fail("division by a non-constant expression", op_tok)
                c = rhs.constant_term()
                if c == 0:
                    self.fail("division by zero", op_tok)
                acc = acc * (1 / Fraction(c))
        return acc

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("-", "+"):
            self.take()
            v = self.unary()
            return -v if tok[1] == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num":
                self.fail("exponent must be a nonnegative integer literal")
            self.take()
            e = _literal(tok)
            if e.denominator != 1 or not re.fullmatch(r"\d+", tok[1]):
                self.fail("non-integer exponent", tok)
            if e > MAX_EXPONENT:
                self.fail("exponent too large", tok)
            base = base ** int(e)
        return base

    def atom(self):
        tok = self.take()
        kind, text = tok[0], tok[1]
        if kind == "num":
            return MultiPoly.const(_literal(tok), self.nvars)
        if kind == "ident":
            if text not in self.names:
                self.fail(f"unknown identifier {text!r}", tok)
            return MultiPoly.var(self.names[text], self.nvars)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(f"unexpected {text or 'end of input'!r}", tok)


def parse_expression(text, variables=VARIABLES):
    """Parse text into an exact MultiPoly in the given variables."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    return _Parser(text, variables).parse()


def format_expression(p, variables=VARIABLES):
    return p.to_string(list(variables))
