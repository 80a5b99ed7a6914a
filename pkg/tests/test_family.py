from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from heightlab.algebra import ONE, ZERO, BiForm, Poly, T, divides, proj_normalize
from heightlab.algebra.projective import point
from heightlab.errors import DomainError
from heightlab.family import apply, degenerate_places, family_from_coeffs, flip, make_family, shift
from tests.strategies import int_polys, rationals

t = T


def small_points():
    return st.builds(lambda a, b: (a, b), int_polys(4), int_polys(4)).filter(
        lambda ab: not (ab[0].is_zero() and ab[1].is_zero())
    )


class TestConstruction:
    def test_quadratic(self, quad):
        assert quad.d == 2 and quad.res == ONE and quad.coeff_degree == 1

    def test_lattes(self, latt):
        assert latt.d == 4
        assert latt.res == 256 * t**4 * (t - 1) ** 4

    def test_shared_factor_rejected(self):
        with pytest.raises(DomainError, match="degenerate"):
            family_from_coeffs([0, 1, 0], [0, 0, 1])

    def test_low_degree_rejected(self):
        with pytest.raises(DomainError):
            family_from_coeffs([1, 0], [0, 1])

    def test_content_removed(self):
        F = family_from_coeffs([t, 0, t * t], [0, 0, t])
        assert F == family_from_coeffs([1, 0, t], [0, 0, 1])

    def test_zero_form_rejected(self):
        with pytest.raises(DomainError):
            BiForm((0, 0, 0))


class TestApply:
    def test_infinity_fixed(self, quad):
        img, c = apply(quad, point(None))
        assert img == point(None) and c == ONE

    def test_lattes_zero(self, latt):
        img, c = apply(latt, point(0))
        assert img == point(None) and c == t**2

    @given(rationals)
    def test_quadratic_constant(self, quad, c):
        img, cancel = apply(quad, point(c))
        assert img == proj_normalize(Poly((c * c,)) + t, ONE) and cancel == ONE

    @given(small_points(), int_polys(2))
    def test_projectivization(self, quad, latt, ab, c):
        a1, a2 = ab
        base = proj_normalize(a1, a2)
        scaled = proj_normalize(a1 * c, a2 * c)
        for F in (quad, latt):
            assert apply(F, scaled) == apply(F, base)

    @given(small_points())
    def test_cancelled_divides_res(self, quad, latt, ab):
        pt = proj_normalize(*ab)
        for F in (quad, latt):
            img, c = apply(F, pt)
            assert divides(c, F.res)
            # the image is exactly the normalized substitution
            assert img == proj_normalize(F.P(pt.a1, pt.a2), F.Q(pt.a1, pt.a2))


class TestShiftFlip:
    def test_shift_lattes(self, latt):
        assert shift(latt, 1).q_at(0) == latt.q_at(1) == 4

    @given(rationals)
    def test_shift_resultant(self, latt, t0):
        assert shift(latt, t0).res == latt.res.taylor_shift(t0)

    @given(rationals)
    def test_shift_quadratic(self, quad, t0):
        assert shift(quad, t0).res == ONE

    def test_shift_zero_identity(self, latt):
        assert shift(latt, 0) is latt

    def test_flip_quadratic(self, quad):
        G = flip(quad)
        assert G.P.coeffs == (t, ZERO, ONE) and G.Q.coeffs == (ZERO, ZERO, t)
        assert G.res == t**4

    def test_flip_constant_family(self, squaring):
        assert flip(squaring) == squaring
        assert degenerate_places(squaring).q_infinity == 0

    def test_flip_flip(self, quad, latt):
        for F in (quad, latt):
            back = flip(flip(F))
            for t0 in (0.3 + 0.2j, -1.7, 2.5j):
                z = np.array([0.4 - 0.3j, 1.3 + 0.1j, -2.0])
                P0, Q0 = F.specialize(t0)
                P1, Q1 = back.specialize(t0)
                f0 = np.polyval(P0, z) / np.polyval(Q0, z)
                f1 = np.polyval(P1, z) / np.polyval(Q1, z)
                assert np.allclose(f0, f1)


class TestPlaces:
    def test_quadratic(self, quad):
        rep = degenerate_places(quad)
        assert rep.finite_places == () and rep.q_infinity == 4 and rep.D_total == 4

    def test_lattes(self, latt):
        rep = degenerate_places(latt)
        assert sorted(rep.rational_roots) == [0, 1]
        assert sum(q for _, q in rep.finite_places) == latt.res.degree

    def test_constant_family(self, squaring):
        assert degenerate_places(squaring).D_total == 0

    def test_irrational_places_numeric(self):
        F = make_family(BiForm((ONE, ZERO, ZERO)), BiForm((ZERO, ONE, t * t - 2)))
        rep = degenerate_places(F)
        roots = sorted(r.real for r, _ in rep.finite_places if not isinstance(r, Fraction))
        assert np.allclose(roots, [-2**0.5, 2**0.5])

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_generic_fibres_have_d_preimages(self, latt, re, im):
        t0 = complex(re, im)
        assume(abs(latt.res_value(t0)) > 1e-3)
        P, Q = latt.specialize(t0)
        for w in (0.7 + 0.2j, -1.1j, 3.0):
            poly = np.array(P) - w * np.array(Q)
            roots = np.roots(poly)
            assert len(roots) == latt.d
            z = roots
            assert np.allclose(np.polyval(P, z), w * np.polyval(Q, z), atol=1e-6 * (1 + abs(w)) * 100)
