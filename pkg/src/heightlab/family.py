"""Algebraic families F_t = (P_t, Q_t) of degree-d maps of C^2 over Q[t]."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from heightlab.algebra import (
    ONE,
    BiForm,
    Poly,
    ProjPointK,
    complex_roots,
    exquo,
    format_poly,
    ord_at,
    poly_divmod,
    poly_gcd,
    poly_gcd_many,
    rational_roots,
    resultant_forms,
    squarefree_factorization,
)
from heightlab.algebra.projective import scale_canonical
from heightlab.errors import DomainError


@dataclass(frozen=True)
class PlaceReport:
    """Degenerate places of a family on the compactified parameter line.

    ``finite_places`` lists (root, q) with Fraction roots when rational and
    complex doubles otherwise; ``D_total`` = deg(res) + q_infinity.
    """

    finite_places: tuple
    q_infinity: int
    D_total: int

    @property
    def rational_roots(self):
        return [r for r, _ in self.finite_places if isinstance(r, Fraction)]


def _normalize_forms(P: BiForm, Q: BiForm):
    coeffs = list(P.coeffs) + list(Q.coeffs)
    g = poly_gcd_many(coeffs)
    if g.degree > 0:
        coeffs = [exquo(c, g) if not c.is_zero() else c for c in coeffs]
    lead = next(c for c in coeffs if not c.is_zero()).lc
    if lead != 1:
        coeffs = [c / lead for c in coeffs]
    d = P.degree
    return BiForm(tuple(coeffs[: d + 1])), BiForm(tuple(coeffs[d + 1 :]))


@dataclass(frozen=True)
class RationalMapFamily:
    P: BiForm
    Q: BiForm
    res: Poly = field(compare=False)

    @property
    def d(self):
        return self.P.degree

    @property
    def coeff_degree(self):
        return max(self.P.coeff_degree, self.Q.coeff_degree)

    def __str__(self):
        return format_family(self)

    # -- degenerate places ------------------------------------------------

    @cached_property
    def res_factors(self):
        """Squarefree factors of res with rational linear factors split off.

        Every common factor of P(a) and Q(a) for coprime (a1, a2) divides res,
        so these are the only candidates for cancellation.
        """
        out = []
        for f, k in squarefree_factorization(self.res):
            rest = f
            for r in rational_roots(f):
                lin = Poly((-r, 1))
                out.append((lin, k, r))
                rest = exquo(rest, lin)
            if rest.degree > 0:
                out.append((rest, k, None))
        return tuple(out)

    @cached_property
    def place_report(self) -> PlaceReport:
        finite = []
        for f, k, r in self.res_factors:
            if r is not None:
                finite.append((r, k))
            else:
                finite.extend((z, k) for z, _ in complex_roots(f).roots)
        q_inf = self.flipped.res.low_order() if not self.flipped.res.is_zero() else 0
        deg_res = self.res.degree if not self.res.is_zero() else 0
        return PlaceReport(tuple(finite), q_inf, deg_res + q_inf)

    @cached_property
    def flipped(self) -> "RationalMapFamily":
        e = self.coeff_degree
        return make_family(
            self.P.map_coeffs(lambda c: c.reversed(e) if not c.is_zero() else c),
            self.Q.map_coeffs(lambda c: c.reversed(e) if not c.is_zero() else c),
        )

    @property
    def D_total(self) -> int:
        return self.place_report.D_total

    def q_at(self, t0) -> int:
        """ord_{t=t0} res."""
        return ord_at(self.res, t0)

    # -- numerics ---------------------------------------------------------

    @cached_property
    def float_coeffs(self):
        """(P, Q) coefficient polys as numpy arrays, highest degree first."""
        def conv(form):
            return [np.array([float(c) for c in reversed(p.coeffs)] or [0.0]) for p in form.coeffs]

        return conv(self.P), conv(self.Q)

    def specialize(self, t):
        """Numeric coefficient arrays of P_t and Q_t (broadcast over array t)."""
        fp, fq = self.float_coeffs
        t = np.asarray(t, dtype=complex)
        return [np.polyval(c, t) for c in fp], [np.polyval(c, t) for c in fq]

    def specialize_with_derivative(self, t):
        """Coefficients of P_t, Q_t and of their t-derivatives."""
        fp, fq = self.float_coeffs
        t = np.asarray(t, dtype=complex)

        def deriv(c):
            return np.polyder(c) if len(c) > 1 else np.array([0.0])

        return (
            [np.polyval(c, t) for c in fp],
            [np.polyval(c, t) for c in fq],
            [np.polyval(deriv(c), t) for c in fp],
            [np.polyval(deriv(c), t) for c in fq],
        )

    def res_value(self, t):
        return np.polyval(np.array([float(c) for c in reversed(self.res.coeffs)]), t)


def make_family(P: BiForm, Q: BiForm) -> RationalMapFamily:
    if P.degree != Q.degree:
        raise DomainError(f"P and Q have different degrees {P.degree}, {Q.degree}")
    if P.degree < 2:
        raise DomainError(f"family degree must be >= 2, got {P.degree}")
    P, Q = _normalize_forms(P, Q)
    res = resultant_forms(P, Q)
    if res.is_zero():
        raise DomainError("degenerate family: P and Q share a factor identically (res = 0)")
    return RationalMapFamily(P, Q, res)


def family_from_coeffs(P, Q) -> RationalMapFamily:
    """Build from coefficient lists (index j multiplies x^(d-j) y^j)."""
    return make_family(BiForm(tuple(P)), BiForm(tuple(Q)))


def _evaluate_forms(F: RationalMapFamily, pt: ProjPointK):
    return F.P(pt.a1, pt.a2), F.Q(pt.a1, pt.a2)


def apply(F: RationalMapFamily, pt: ProjPointK):
    """Image of a point and the monic factor cancelled while normalizing.

    Cancellation is searched only among factors of res; the resultant
    identities guarantee nothing else can be common to P(a) and Q(a).
    """
    pa, qa = _evaluate_forms(F, pt)
    if qa.is_zero():
        return ProjPointK(ONE, Poly()), pa.monic()
    if pa.is_zero():
        return ProjPointK(Poly(), ONE), qa.monic()
    cancelled = ONE
    for f, k, r in F.res_factors:
        for _ in range(k):
            if r == 0:
                if pa.numerators[0] or qa.numerators[0]:
                    break
                pa, qa = pa.shift_down(1), qa.shift_down(1)
                cancelled = cancelled.shift_up(1)
                continue
            h = poly_gcd(f, poly_divmod(pa, f)[1])
            if h.degree > 0:
                h = poly_gcd(h, poly_divmod(qa, h)[1])
            if h.degree <= 0:
                break
            pa, qa = exquo(pa, h), exquo(qa, h)
            cancelled = cancelled * h
    return scale_canonical(pa, qa), cancelled


def shift(F: RationalMapFamily, t0) -> RationalMapFamily:
    """Re-center the parameter: coefficients c(t) -> c(t + t0), t0 rational."""
    t0 = Fraction(t0)
    if t0 == 0:
        return F
    return make_family(
        F.P.map_coeffs(lambda c: c.taylor_shift(t0)),
        F.Q.map_coeffs(lambda c: c.taylor_shift(t0)),
    )


def flip(F: RationalMapFamily) -> RationalMapFamily:
    """Model at t = infinity in the parameter s = 1/t."""
    return F.flipped


def degenerate_places(F: RationalMapFamily) -> PlaceReport:
    return F.place_report


# -- printing ---------------------------------------------------------------


def _paren(p: Poly):
    s = format_poly(p, "t")
    if len([c for c in p.numerators if c]) > 1 or s.startswith("-"):
        return f"({s})"
    return s


def _signed_term(c: Poly, mono: str):
    """(sign, body) for c * mono; single-monomial coefficients fold their sign."""
    if len([x for x in c.numerators if x]) > 1:
        s = f"({format_poly(c, 't')})"
        return "+", (f"{s}*{mono}" if mono else s)
    s = format_poly(c, "t")
    sign = "-" if s.startswith("-") else "+"
    s = s.lstrip("-")
    if not mono:
        return sign, s
    return sign, (mono if s == "1" else f"{s}*{mono}")


def format_dehomogenized(form: BiForm) -> str:
    """The form at y = 1 as a polynomial in z with Q[t] coefficients."""
    d = form.degree
    terms = []
    for j, c in enumerate(form.coeffs):
        if c.is_zero():
            continue
        k = d - j
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        terms.append(_signed_term(c, mono))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def format_family(F: RationalMapFamily) -> str:
    """Canonical printable form; reparses to an identical family."""
    return f"({format_dehomogenized(F.P)}) / ({format_dehomogenized(F.Q)})"


def format_forms(F: RationalMapFamily) -> str:
    def hom(form):
        d = form.degree
        terms = []
        for j, c in enumerate(form.coeffs):
            if c.is_zero():
                continue
            xs = [] if d - j == 0 else (["x"] if d - j == 1 else [f"x^{d - j}"])
            ys = [] if j == 0 else (["y"] if j == 1 else [f"y^{j}"])
            terms.append("*".join([_paren(c)] + xs + ys))
        return " + ".join(terms)

    return f"P = {hom(F.P)}\nQ = {hom(F.Q)}"
