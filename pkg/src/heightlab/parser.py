"""Expression parser for families and marked points.

Grammar (precedence climbing, ``^`` binds tightest and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' INTEGER)*
    atom   := INTEGER | 'z' | 't' | '(' expr ')'

Ratios such as ``1/2`` are division of integer literals.  Exponents must be
non-negative integer literals.  ``#`` starts a comment that runs to the end of
the line.

A family is given either as a rational expression in z with coefficients in
Q[t], or as two explicit coefficient lists ``[c_0, ..., c_d] : [e_0, ..., e_d]``
where c_j multiplies x^(d-j) y^j.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from heightlab.algebra import ONE, ZERO, BiForm, Poly, ProjPointK, format_poly, proj_normalize
from heightlab.errors import DomainError, ParseError
from heightlab.family import RationalMapFamily, format_dehomogenized, make_family


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "end"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"\s+|#[^\n]*|\d+|[A-Za-z_]\w*|.", re.S)
_OPS = set("+-*/^()[],:")


def tokenize(text: str):
    out = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        s = m.group()
        if s[0].isspace() or s[0] == "#":
            pass
        elif s[0].isdigit():
            out.append(Token("int", s, line, col))
        elif s[0].isalpha() or s[0] == "_":
            out.append(Token("name", s, line, col))
        elif s in _OPS:
            out.append(Token("op", s, line, col))
        else:
            raise ParseError("unexpected character", line, col, s)
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
    out.append(Token("end", "", line, col))
    return out


# -- values: polynomials in z with Q[t] coefficients, and their quotients ----


def _zp_trim(c):
    c = list(c)
    while c and c[-1].is_zero():
        c.pop()
    return tuple(c)


def zp_add(a, b):
    n = max(len(a), len(b))
    return _zp_trim(
        (a[i] if i < len(a) else ZERO) + (b[i] if i < len(b) else ZERO) for i in range(n)
    )


def zp_neg(a):
    return tuple(-c for c in a)


def zp_mul(a, b):
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return _zp_trim(out)


def zp_pow(a, k):
    out = (ONE,)
    base = a
    while k:
        if k & 1:
            out = zp_mul(out, base)
        k >>= 1
        if k:
            base = zp_mul(base, base)
    return out


@dataclass(frozen=True)
class RatZ:
    """num/den with num, den polynomials in z (ascending tuples of Q[t] Polys)."""

    num: tuple
    den: tuple

    @classmethod
    def const(cls, p: Poly):
        return cls(_zp_trim((p,)), (ONE,))

    def z_free(self):
        return len(self.num) <= 1 and len(self.den) <= 1


class _Parser:
    def __init__(self, text: str, variables):
        self.toks = tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.column, tok.text or "<end of input>")

    def expect(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.error(f"expected {text!r}")

    def at(self, *texts):
        return self.tok.kind == "op" and self.tok.text in texts

    def finish(self):
        if self.tok.kind != "end":
            self.error("unexpected token")

    # grammar

    def expr(self):
        v = self.term()
        while self.at("+", "-"):
            op = self.advance().text
            w = self.term()
            v = self.add(v, w) if op == "+" else self.add(v, self.neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.at("*", "/"):
            op = self.advance()
            w = self.unary()
            v = self.mul(v, w) if op.text == "*" else self.div(v, w, op)
        return v

    def unary(self):
        if self.at("-"):
            self.advance()
            return self.neg(self.unary())
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if not self.at("^"):
            return base
        self.advance()
        return self.pow(base, self.exponent())

    def exponent(self):
        if self.tok.kind != "int":
            self.error("exponent must be a non-negative integer literal")
        k = int(self.advance().text)
        if self.at("^"):
            self.advance()
            k = k ** self.exponent()
        return k

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return self.number(int(tok.text))
        if tok.kind == "name":
            if tok.text not in self.variables:
                self.error(f"unknown identifier (expected one of {', '.join(sorted(self.variables))})")
            self.advance()
            return self.variable(tok.text)
        if self.at("("):
            self.advance()
            v = self.expr()
            self.expect(")")
            return v
        self.error("expected a number, variable or '('")


class _RationalZParser(_Parser):
    """Values are RatZ; the variables are z and t."""

    def number(self, k):
        return RatZ.const(Poly.constant(k))

    def variable(self, name):
        if name == "t":
            return RatZ.const(Poly.t())
        return RatZ((ZERO, ONE), (ONE,))

    def add(self, a, b):
        if a.den == b.den:
            return RatZ(zp_add(a.num, b.num), a.den)
        return RatZ(zp_add(zp_mul(a.num, b.den), zp_mul(b.num, a.den)), zp_mul(a.den, b.den))

    def neg(self, a):
        return RatZ(zp_neg(a.num), a.den)

    def mul(self, a, b):
        return RatZ(zp_mul(a.num, b.num), zp_mul(a.den, b.den))

    def div(self, a, b, tok):
        if not b.num:
            raise DomainError(f"division by the zero polynomial (line {tok.line}, column {tok.column})")
        num, den = zp_mul(a.num, b.den), zp_mul(a.den, b.num)
        # keep constant denominators out of the way
        if len(den) == 1 and den[0].is_constant():
            c = den[0].lc
            return RatZ(tuple(p / c for p in num), (ONE,))
        return RatZ(num, den)

    def pow(self, a, k):
        return RatZ(zp_pow(a.num, k), zp_pow(a.den, k))


class _PolyTParser(_Parser):
    """Values are Polys in t; division only by nonzero constants."""

    def number(self, k):
        return Poly.constant(k)

    def variable(self, name):
        return Poly.t()

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b, tok):
        if b.is_zero():
            raise DomainError(f"division by the zero polynomial (line {tok.line}, column {tok.column})")
        if b.degree > 0:
            self.error("coefficients must be polynomials in t", tok)
        return a / b.lc

    def pow(self, a, k):
        return a**k


# -- families ----------------------------------------------------------------


def _homogenize(num, den, d):
    """Coefficient tuple of y^d N(x/y): index j multiplies x^(d-j) y^j."""
    return tuple(num[d - j] if d - j < len(num) else ZERO for j in range(d + 1))


def family_from_rational(value: RatZ) -> RationalMapFamily:
    num, den = value.num, value.den
    if not num:
        raise DomainError("family is identically zero")
    d = max(len(num), len(den)) - 1
    if d < 2:
        raise DomainError(f"family degree must be >= 2, got {d}")
    return make_family(BiForm(_homogenize(num, den, d)), BiForm(_homogenize(den, num, d)))


def _coeff_list(p: _PolyTParser):
    p.expect("[")
    out = [p.expr()]
    while p.at(","):
        p.advance()
        out.append(p.expr())
    p.expect("]")
    return out


def parse_family(text: str) -> RationalMapFamily:
    """A family from a rational expression in z, t or from coefficient lists."""
    toks = tokenize(text)
    if toks[0].kind == "op" and toks[0].text == "[":
        p = _PolyTParser(text, {"t"})
        P = _coeff_list(p)
        p.expect(":")
        Q = _coeff_list(p)
        p.finish()
        if len(P) != len(Q):
            raise DomainError(f"coefficient lists have different lengths {len(P)}, {len(Q)}")
        if len(P) < 3:
            raise DomainError(f"family degree must be >= 2, got {len(P) - 1}")
        return make_family(BiForm(tuple(P)), BiForm(tuple(Q)))
    p = _RationalZParser(text, {"z", "t"})
    v = p.expr()
    p.finish()
    return family_from_rational(v)


def parse_point(text: str) -> ProjPointK:
    """A point of P^1(Q(t)): a rational expression in t, or ``inf``."""
    if text.strip() == "inf":
        return ProjPointK(ONE, ZERO)
    p = _RationalZParser(text, {"t"})
    v = p.expr()
    p.finish()
    a1 = v.num[0] if v.num else ZERO
    a2 = v.den[0]
    return proj_normalize(a1, a2)


def parse_poly(text: str) -> Poly:
    p = _PolyTParser(text, {"t"})
    v = p.expr()
    p.finish()
    return v


def format_coefficient_lists(F: RationalMapFamily) -> str:
    def lst(form):
        return "[" + ", ".join(format_poly(c) for c in form.coeffs) + "]"

    return f"{lst(F.P)} : {lst(F.Q)}"


def format_point(a: ProjPointK) -> str:
    return str(a)


__all__ = [
    "Token",
    "format_coefficient_lists",
    "format_dehomogenized",
    "format_point",
    "parse_family",
    "parse_point",
    "parse_poly",
    "tokenize",
]
