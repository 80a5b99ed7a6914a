"""Hypothesis strategies shared by the suites."""

from fractions import Fraction

from hypothesis import strategies as st

from heightlab.algebra import Poly

small_ints = st.integers(min_value=-20, max_value=20)
rationals = st.builds(Fraction, small_ints, st.integers(min_value=1, max_value=6))


def polys(max_degree=6, coeffs=rationals, nonzero=False):
    s = st.lists(coeffs, min_size=1, max_size=max_degree + 1).map(Poly)
    return s.filter(lambda p: not p.is_zero()) if nonzero else s


def int_polys(max_degree=6, nonzero=True):
    return polys(max_degree, small_ints, nonzero)
