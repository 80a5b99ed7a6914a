import os

import pytest
from hypothesis import HealthCheck, settings

from heightlab.algebra import Poly, T
from heightlab.family import family_from_coeffs

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

t = T


@pytest.fixture(scope="session")
def quad():
    """z^2 + t, lifted as (x^2 + t y^2, y^2)."""
    return family_from_coeffs([1, 0, t], [0, 0, 1])


@pytest.fixture(scope="session")
def latt():
    """(z^2 - t)^2 / (4 z (z - 1)(z - t))."""
    return family_from_coeffs([1, 0, -2 * t, 0, t**2], [0, 4, -4 - 4 * t, 4 * t, 0])


@pytest.fixture(scope="session")
def squaring():
    """The constant family z^2."""
    return family_from_coeffs([1, 0, 0], [0, 0, 1])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
