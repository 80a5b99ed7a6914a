"""Points of P^1(Q(t)) in canonical coprime form."""

from __future__ import annotations

from dataclasses import dataclass

from heightlab.algebra.poly import ONE, ZERO, Poly, exquo, format_poly, poly_gcd
from heightlab.errors import DomainError


@dataclass(frozen=True)
class ProjPointK:
    """(a1 : a2) with gcd(a1, a2) = 1.

    The coordinate of larger degree (a2 on ties) is monic, so two instances
    are equal exactly when they are the same point of P^1(Q(t)).  Build with
    :func:`proj_normalize` unless the pair is already canonical.
    """

    a1: Poly
    a2: Poly

    @property
    def degree(self):
        return max(self.a1.degree, self.a2.degree)

    @property
    def size(self):
        """Number of stored coefficients, the unit of the degree budget."""
        return len(self.a1) + len(self.a2)

    def is_infinity(self):
        return self.a2.is_zero()

    def is_constant(self):
        return self.degree == 0

    def constant_value(self):
        """The point as a Fraction (or None for infinity); only for constant points."""
        if not self.is_constant():
            raise DomainError("point is not constant")
        if self.a2.is_zero():
            return None
        return self.a1.coeff(0) / self.a2.coeff(0)

    def __str__(self):
        if self.a2.is_zero():
            return "inf"
        if self.a2 == ONE:
            return format_poly(self.a1)
        return f"({format_poly(self.a1)})/({format_poly(self.a2)})"


def _scale_canonical(a1: Poly, a2: Poly) -> ProjPointK:
    lead = a2.lc if a2.degree >= a1.degree else a1.lc
    if lead != 1:
        inv = 1 / lead
        a1, a2 = a1 * inv, a2 * inv
    return ProjPointK(a1, a2)


def proj_normalize(a1: Poly, a2: Poly) -> ProjPointK:
    if a1.is_zero() and a2.is_zero():
        raise DomainError("(0 : 0) is not a point of P^1")
    if a2.is_zero():
        return ProjPointK(ONE, ZERO)
    if a1.is_zero():
        return ProjPointK(ZERO, ONE)
    g = poly_gcd(a1, a2)
    if g.degree > 0:
        a1, a2 = exquo(a1, g), exquo(a2, g)
    return _scale_canonical(a1, a2)


def scale_canonical(a1: Poly, a2: Poly) -> ProjPointK:
    """Canonical scaling for a pair already known to be coprime."""
    if a2.is_zero():
        return ProjPointK(ONE, ZERO)
    if a1.is_zero():
        return ProjPointK(ZERO, ONE)
    return _scale_canonical(a1, a2)


def point(value) -> ProjPointK:
    """Convenience: a constant, a Poly, or None (infinity) as a point."""
    if value is None:
        return ProjPointK(ONE, ZERO)
    if isinstance(value, ProjPointK):
        return value
    if not isinstance(value, Poly):
        value = Poly.constant(value)
    return proj_normalize(value, ONE)
