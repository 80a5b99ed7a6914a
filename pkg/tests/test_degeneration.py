import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heightlab.algebra import T, Poly
from heightlab.degeneration import (
    AnnulusSpec,
    MarkedLift,
    OrderSequence,
    check_order_invariants,
    convergence_ratios,
    escape_grid,
    escape_values,
    homogeneous_escape_rate,
    lemma_bound_check,
    order_sequence,
    sample_parameters,
    sample_unit_vectors,
    slow_growth_diagnostic,
    stability_linkage,
)
from heightlab.errors import DomainError, InvariantViolation

t = T
LIFTS = [MarkedLift(2, 1), MarkedLift(0, 1), MarkedLift(3, 1), MarkedLift(1, 0), MarkedLift(t + 2, -2)]


def mp_escape(F, A, t0, n, a_n, dps=60):
    """G_n by direct high-precision iteration without any renormalization."""
    mpmath.mp.dps = dps
    t0 = mpmath.mpc(t0)

    def ev(p):
        return sum(mpmath.mpf(c.numerator) / c.denominator * t0**i for i, c in enumerate(p.coeffs))

    P = [ev(c) for c in F.P.coeffs]
    Q = [ev(c) for c in F.Q.coeffs]
    x, y = ev(A.A1), ev(A.A2)
    d = F.d
    for _ in range(n):
        xp = [x**k for k in range(d + 1)]
        yp = [y**k for k in range(d + 1)]
        x, y = (
            sum(P[j] * xp[d - j] * yp[j] for j in range(d + 1)),
            sum(Q[j] * xp[d - j] * yp[j] for j in range(d + 1)),
        )
    norm = max(abs(x), abs(y))
    return float((mpmath.log(norm) - a_n * mpmath.log(abs(t0))) / mpmath.mpf(d) ** n)


class TestOrders:
    def test_lattes_zero_lift(self, latt):
        seq = order_sequence(latt, MarkedLift(0, 1), 6)
        assert seq.q == 4 and seq.a[1] == 2
        assert seq.k[1:] == [0] * 5

    @pytest.mark.parametrize("A", LIFTS[:3])
    def test_bounds(self, latt, A):
        seq = order_sequence(latt, A, 6)
        assert seq.a[0] == 0
        assert all(0 <= k <= seq.q for k in seq.k)
        check_order_invariants(seq, latt.d)
        norm = seq.normalized(latt.d)
        for n in range(6):
            assert 0 <= norm[n + 1] - norm[n] <= Fraction(seq.q, latt.d ** (n + 1))

    def test_quadratic_strict_rejected(self, quad):
        with pytest.raises(DomainError):
            order_sequence(quad, MarkedLift(1, 1), 3)

    @given(st.integers(-5, 5), st.integers(-5, 5))
    def test_quadratic_lenient(self, quad, x, y):
        if x == 0 and y == 0:
            return
        seq = order_sequence(quad, MarkedLift(x, y), 5, lenient=True)
        assert seq.a == [0] * 6 and seq.k == [0] * 5

    @pytest.mark.parametrize("A", LIFTS)
    def test_series_matches_exact(self, latt, A):
        exact = order_sequence(latt, A, 5, mode="exact")
        series = order_sequence(latt, A, 5, mode="series")
        assert exact.a == series.a and exact.k == series.k

    @pytest.mark.parametrize("restart", [1, 2, 3])
    def test_restart_bound(self, latt, restart):
        seq = order_sequence(latt, MarkedLift(2, 1), 6, restart=restart)
        assert seq.restart_index == restart
        assert all(0 <= ell <= seq.q for ell in seq.ell)

    def test_invariant_checker_fires(self):
        with pytest.raises(InvariantViolation):
            check_order_invariants(OrderSequence(q=1, a=[0, 5], k=[5]), 2)
        with pytest.raises(InvariantViolation):
            check_order_invariants(OrderSequence(q=4, a=[1, 2], k=[0]), 2)

    def test_lift_must_not_vanish(self):
        with pytest.raises(DomainError):
            MarkedLift(t, t**2)


class TestEscape:
    @pytest.mark.parametrize("A", LIFTS)
    @pytest.mark.parametrize("t0", [0.3 + 0.1j, -0.12j, 0.45])
    def test_against_high_precision(self, latt, A, t0):
        N = 5
        seq = order_sequence(latt, A, N, mode="series")
        G = escape_values(latt, A, np.array([t0]), seq.k)
        for n in range(N + 1):
            assert abs(G[n][0] - mp_escape(latt, A, t0, n, seq.a[n])) <= 1e-11

    def test_gauge_invariance(self, latt):
        rng = np.random.default_rng(5)
        tt = sample_parameters(rng, 50, 0.1, 0.5)
        A = MarkedLift(2, 1)
        seq = order_sequence(latt, A, 6, mode="series")
        base = escape_values(latt, A, tt, seq.k)
        for j in (1, 3):
            # F^n(t^j A) = t^(j d^n) F^n(A): same increments, the extra order is absorbed
            shifted = escape_values(latt, A.times_t_power(j), tt, seq.k)
            assert np.allclose(shifted, base, rtol=0, atol=1e-12)
        lam = Fraction(7, 2)
        scaled = escape_values(latt, A.scaled(lam), tt, seq.k)
        assert np.allclose(scaled - base, math.log(lam), rtol=0, atol=1e-12)

    def test_convergence_generic_lift(self, latt):
        g = escape_grid(latt, MarkedLift(t + 2, -2), AnnulusSpec(0.1, 0.5, 32, 16), 7)
        ratios = convergence_ratios(g, 3, 6)
        assert all(abs(r - 0.25) <= 0.2 for r in ratios.values())
        assert g.nan_cells == 0

    def test_slow_growth(self, latt):
        rep = slow_growth_diagnostic(latt, MarkedLift(2, 1), [1e-1, 1e-2, 1e-3, 1e-4], 6)
        assert rep.nonincreasing

    def test_slow_growth_scaling_law(self, latt):
        radii = [1e-1, 1e-2, 1e-3]
        a = slow_growth_diagnostic(latt, MarkedLift(0, 1), radii, 5)
        b = slow_growth_diagnostic(latt, MarkedLift(0, 1).scaled(Fraction(1, 7)), radii, 5)
        for r, x, y in zip(radii, a.m, b.m):
            assert abs(abs(y - x) - math.log(7) / abs(math.log(r))) <= 1e-9

    def test_slow_growth_nondegenerate(self, quad):
        rep = slow_growth_diagnostic(quad, MarkedLift(1, 1), [1e-1, 1e-2, 1e-3], 6)
        assert rep.nonincreasing and rep.m[-1] < rep.m[0]

    def test_bad_radii(self, latt):
        with pytest.raises(DomainError):
            slow_growth_diagnostic(latt, MarkedLift(2, 1), [1e-2, 1e-1], 3)

    def test_annulus_validation(self):
        with pytest.raises(DomainError):
            AnnulusSpec(0.5, 0.1)


class TestLemmaBound:
    def test_lattes(self, latt):
        rng = np.random.default_rng(0)
        tt = sample_parameters(rng, 10_000, 1e-3, 1e-1)
        z = sample_unit_vectors(rng, 10_000)
        rep = lemma_bound_check(latt, tt, z)
        assert rep.q == 4 and rep.alpha_hat > 0 and math.isfinite(rep.beta_hat)
        assert rep.violations == 0

    def test_quadratic(self, quad):
        rng = np.random.default_rng(1)
        for lo, hi in [(1e-3, 1e-2), (1e-2, 1e-1)]:
            rep = lemma_bound_check(quad, sample_parameters(rng, 2000, lo, hi), sample_unit_vectors(rng, 2000))
            assert rep.q == 0 and rep.alpha_hat > 0.2

    def test_homogeneity(self, latt):
        rng = np.random.default_rng(2)
        tt = sample_parameters(rng, 500, 1e-3, 1e-1)
        z1, z2 = sample_unit_vectors(rng, 500)
        a = lemma_bound_check(latt, tt, (z1, z2))
        b = lemma_bound_check(latt, tt, (2 * z1, 2 * z2))
        assert math.isclose(a.alpha_hat, b.alpha_hat, rel_tol=1e-12)
        assert math.isclose(a.beta_hat, b.beta_hat, rel_tol=1e-12)


class TestHomogeneousEscape:
    @given(st.floats(0.05, 0.9), st.floats(0, 6.28), st.floats(-2, 2), st.floats(-2, 2))
    def test_functional_equations(self, latt, r, th, x, y):
        t0 = r * complex(math.cos(th), math.sin(th))
        if abs(latt.res_value(t0)) < 1e-8 or (abs(x) < 1e-3 and abs(y) < 1e-3):
            return
        z = (complex(x, 0.3), complex(y, -0.2))
        G = homogeneous_escape_rate(latt, t0, z, 30)
        P, Q = latt.specialize(t0)
        from heightlab.degeneration import eval_forms

        fz = eval_forms(P, Q, np.asarray(z[0]), np.asarray(z[1]))
        G1 = homogeneous_escape_rate(latt, t0, (complex(fz[0]), complex(fz[1])), 30)
        assert abs(G1 - latt.d * G) <= 1e-6 * max(1.0, abs(G1))
        G2 = homogeneous_escape_rate(latt, t0, (2.5j * z[0], 2.5j * z[1]), 30)
        assert abs(G2 - G - math.log(2.5)) <= 1e-6

    def test_self_consistency(self, quad):
        a = homogeneous_escape_rate(quad, 0.25, (1.0, 1.0), 20)
        b = homogeneous_escape_rate(quad, 0.25, (1.0, 1.0), 30)
        assert abs(a - b) <= 1e-4

    def test_degenerate_parameter(self, latt):
        with pytest.raises(DomainError):
            homogeneous_escape_rate(latt, 0.0, (1.0, 1.0), 5)


class TestStabilityLinkage:
    @pytest.mark.parametrize("A", [MarkedLift(0, 1), MarkedLift(1, 1), MarkedLift(t, 1), MarkedLift(1, 0)])
    def test_preperiodic_lifts(self, latt, A):
        g = stability_linkage(latt, A, AnnulusSpec(0.1, 0.5, 32, 16), 6)
        assert g.mean_value_defect <= g.tolerance

    def test_infinity_is_flat(self, latt):
        g = stability_linkage(latt, MarkedLift(1, 0), AnnulusSpec(0.1, 0.5, 32, 16), 6)
        assert g.spread <= g.tolerance
