import numpy as np
import pytest

from covertjam.geometry import NetworkGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def square():
    """The default square layout: every link is 5 m, beta = 2."""
    return NetworkGeometry.default()


# one verdict line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
