import math

import pytest

from linea.core import Polynomial
from linea.linearizer import koenigs_coeffs


@pytest.fixture(scope="session")
def exp_lin():
    """Linearizer of z^2 at 1, which is e^z."""
    return koenigs_coeffs(Polynomial([0, 0, 1]), 1.0)


@pytest.fixture(scope="session")
def cosh_lin():
    """Linearizer of z^2 - 2 at 2, which is 2cosh(sqrt z)."""
    return koenigs_coeffs(Polynomial([-2, 0, 1]), 2.0)


@pytest.fixture(scope="session")
def f32():
    return koenigs_coeffs(Polynomial([0, 1.5, 1]), 0.0)


@pytest.fixture(scope="session")
def f43():
    return koenigs_coeffs(Polynomial([0, 4 / 3, 1]), 0.0)


@pytest.fixture(scope="session")
def basilica_lin():
    return koenigs_coeffs(Polynomial([-1, 0, 1]), (1 + math.sqrt(5)) / 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
