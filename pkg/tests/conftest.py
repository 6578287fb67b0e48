import numpy as np
import pytest

from nccf.ncpoly import MatTuple

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_tuple(rng, d, n, scale=1.0):
    return MatTuple(scale * (rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))) / np.sqrt(2))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
