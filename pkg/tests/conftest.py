import numpy as np
import pytest

from modulaire.linalg import Tolerances


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def e(n, i, j):
    """Matrix unit with 1-based indices, as written in the examples."""
    m = np.zeros((n, n), dtype=complex)
    m[i - 1, j - 1] = 1
    return m


def basis_vec(dim, k):
    v = np.zeros(dim, dtype=complex)
    v[k] = 1
    return v


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
