"""Binary forms with Q[t] coefficients and their homogeneous resultant."""

from __future__ import annotations

from dataclasses import dataclass

from heightlab.algebra.poly import ONE, ZERO, Poly, exquo
from heightlab.errors import DomainError


@dataclass(frozen=True)
class BiForm:
    """sum_j coeffs[j] * x^(d-j) * y^j with coefficients in Q[t]."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, Poly) else Poly.constant(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise DomainError("a binary form needs degree >= 1")
        if all(c.is_zero() for c in coeffs):
            raise DomainError("binary form is identically zero")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def coeff_degree(self):
        return max(c.degree for c in self.coeffs)

    def __call__(self, a1: Poly, a2: Poly) -> Poly:
        """Substitute x = a1, y = a2."""
        d = self.degree
        p1 = [ONE]
        p2 = [ONE]
        for _ in range(d):
            p1.append(p1[-1] * a1)
            p2.append(p2[-1] * a2)
        out = ZERO
        for j, c in enumerate(self.coeffs):
            if not c.is_zero():
                out = out + c * (p1[d - j] * p2[j])
        return out

    def map_coeffs(self, fn):
        return BiForm(tuple(fn(c) for c in self.coeffs))

    def specialize(self, t0):
        """Coefficients evaluated at t = t0 (float/complex or exact)."""
        return [c(t0) for c in self.coeffs]


def _bareiss_det(m):
    """Fraction-free determinant of a square matrix with Poly entries."""
    m = [list(row) for row in m]
    n = len(m)
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return ZERO
        piv = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = exquo(m[i][j] * piv - m[i][k] * m[k][j], prev)
        prev = piv
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def sylvester_matrix(P: BiForm, Q: BiForm):
    d = P.degree
    size = 2 * d
    rows = []
    for form in (P, Q):
        for shift in range(d):
            row = [ZERO] * size
            for j, c in enumerate(form.coeffs):
                row[shift + j] = c
            rows.append(row)
    return rows


def resultant_forms(P: BiForm, Q: BiForm) -> Poly:
    """Homogeneous resultant Res(P, Q) in Q[t] (Sylvester determinant)."""
    if P.degree != Q.degree:
        raise DomainError(f"forms have different degrees {P.degree} and {Q.degree}")
    return _bareiss_det(sylvester_matrix(P, Q))
