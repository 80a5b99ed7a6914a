from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from heightlab.algebra import ONE, Poly, T, proj_normalize
from heightlab.algebra.projective import point
from heightlab.dynamics import (
    PositiveHeight,
    Preperiodic,
    Undetermined,
    canonical_height,
    classify,
    constant_tail_certificate,
    degree_sequence,
    orbit,
)
from heightlab.errors import InvariantViolation, ResourceError
from heightlab.family import apply
from tests.strategies import int_polys, rationals

t = T


def quad_degree_formula(a):
    """deg Q(a) for z^2 + t: 2 deg a if deg a1 > deg a2, else 2 deg a + 1."""
    return 2 * a.degree if a.a1.degree > a.a2.degree else 2 * a.degree + 1


class TestOrbit:
    def test_quadratic_infinity(self, quad):
        assert orbit(quad, point(None), 5).cycle == (0, 1)

    @pytest.mark.parametrize("a", [0, 1, T, None])
    def test_lattes_preperiodic_points(self, latt, a):
        orb = orbit(latt, point(a), 8)
        assert orb.cycle is not None
        assert orb.points[-1] == point(None)
        assert apply(latt, point(None))[0] == point(None)

    def test_lattes_zero_shape(self, latt):
        orb = orbit(latt, point(0), 8)
        assert orb.points == [point(0), point(None), point(None)]
        assert orb.cycle == (1, 1)

    def test_quadratic_zero(self, quad):
        orb = orbit(quad, point(0), 12)
        assert orb.cycle is None
        assert orb.degrees == [0] + [2**i for i in range(12)]

    def test_points_follow_apply(self, latt):
        orb = orbit(latt, point(2), 4)
        for a, b in zip(orb.points, orb.points[1:]):
            assert apply(latt, a)[0] == b

    def test_budget(self, quad):
        with pytest.raises(ResourceError) as info:
            orbit(quad, point(0), 40, budget=5000)
        assert info.value.n is not None


class TestDegreeSequence:
    def test_examples(self, quad, latt):
        assert degree_sequence(quad, point(3), 4) == [0, 1, 2, 4, 8]
        assert degree_sequence(quad, proj_normalize(ONE, t), 3) == [1, 3, 6, 12]
        assert degree_sequence(latt, point(2), 3) == [0, 2, 8, 32]

    def test_first_image_of_one_over_t(self, quad):
        img, _ = apply(quad, proj_normalize(ONE, t))
        assert (img.a1, img.a2) == (t**3 + 1, t**2)

    @given(int_polys(3), int_polys(3))
    def test_case_formula(self, quad, a1, a2):
        a = proj_normalize(a1, a2)
        assume(not a.is_infinity())
        seq = degree_sequence(quad, a, 4)
        assert seq[1] == quad_degree_formula(a)
        # doubling from the first image on
        assert seq[2:] == [seq[1] * 2**i for i in range(1, 4)]


class TestHeight:
    @pytest.mark.parametrize("c", [0, 1, 2, -1, Fraction(1, 2)])
    def test_quadratic_constants(self, quad, c):
        enc = canonical_height(quad, point(c), 12)
        assert Fraction(1, 2) in enc
        assert enc.width <= Fraction(8, 2**12)

    def test_infinity(self, quad):
        enc = canonical_height(quad, point(None), 5)
        assert enc.lo == enc.hi == 0

    def test_quadratic_t(self, quad):
        assert 1 in canonical_height(quad, point(T), 10)

    def test_lattes_two(self, latt):
        assert Fraction(1, 2) in canonical_height(latt, point(2), 6)

    @given(rationals, st.integers(1, 9))
    def test_width_formula(self, quad, c, n):
        enc = canonical_height(quad, point(c), n)
        # before intersection the width is exactly 2 D / (d^n (d - 1))
        assert enc.width <= Fraction(2 * quad.D_total, 2**n)
        assert 0 <= enc.lo <= enc.hi

    @given(int_polys(2), int_polys(2))
    def test_functoriality(self, quad, a1, a2):
        a = proj_normalize(a1, a2)
        fa = apply(quad, a)[0]
        ea, efa = canonical_height(quad, a, 8), canonical_height(quad, fa, 8)
        assert quad.d * ea.lo <= efa.hi and efa.lo <= quad.d * ea.hi

    @given(int_polys(3), int_polys(3))
    def test_centers_stay_near_degree(self, latt, a1, a2):
        a = proj_normalize(a1, a2)
        seq = degree_sequence(latt, a, 4)
        for n, g in enumerate(seq[1:], start=1):
            center = Fraction(g, latt.d**n)
            assert abs(center - a.degree) <= a.degree + Fraction(latt.D_total, latt.d - 1)

    def test_nested_enclosures(self, latt):
        prev = None
        for n in range(1, 6):
            enc = canonical_height(latt, point(3), n)
            if prev is not None:
                assert prev.lo <= enc.lo <= enc.hi <= prev.hi
            prev = enc


class TestClassify:
    @pytest.mark.parametrize("a", [0, 1, T, None])
    def test_lattes(self, latt, a):
        c = classify(latt, point(a))
        assert isinstance(c, Preperiodic)
        assert c.enclosure.lo == c.enclosure.hi == 0

    def test_quadratic_zero_positive_after_four(self, quad):
        c = classify(quad, point(0))
        assert isinstance(c, PositiveHeight) and c.enclosure.n_used == 4
        assert c.enclosure.lo > 0

    def test_constant_family(self, squaring):
        assert classify(squaring, point(1)) == Preperiodic(0, 1, classify(squaring, point(1)).enclosure)

    def test_quadratic_infinity(self, quad):
        c = classify(quad, point(None))
        assert (c.m, c.p) == (0, 1)

    def test_budget_gives_undetermined(self, latt):
        c = classify(latt, point(2), budget=10)
        assert isinstance(c, Undetermined) and c.reason == "budget"

    def test_constant_family_undetermined_with_certificate(self, squaring):
        c = classify(squaring, point(2), nmax=4)
        assert isinstance(c, Undetermined)
        assert c.certificate.values == (2, 4, 16, 256, 65536)


class TestCertificate:
    def test_quadratic_none(self, quad):
        assert constant_tail_certificate(orbit(quad, point(0), 6), 2) is None

    def test_constant_family_fixed_point(self, squaring):
        orb = orbit(squaring, point(1), 6)
        assert constant_tail_certificate(orb, 2) is None and orb.cycle == (0, 1)


class TestTripwire:
    def test_violation_surfaces(self, quad, monkeypatch):
        # a family whose D_total is understated must abort, never clamp
        import heightlab.dynamics as dyn

        monkeypatch.setattr(type(quad), "D_total", property(lambda self: 0))
        with pytest.raises(InvariantViolation) as info:
            list(dyn.iterate(quad, point(0), 3))
        assert info.value.witness["n"] == 1

    @given(int_polys(3), int_polys(3))
    def test_per_step_bound(self, latt, a1, a2):
        a = proj_normalize(a1, a2)
        orb = orbit(latt, a, 3)
        assert orb.max_deviation <= latt.D_total

    def test_quadratic_observed_deviation(self, quad):
        orb = orbit(quad, point(Poly.constant(5)), 8)
        assert orb.deviations[0] == 1 and set(orb.deviations[1:]) == {0}
