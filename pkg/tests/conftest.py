import numpy as np
import pytest

from psical.grid import make_grid, symbol_grid


@pytest.fixture
def line():
    return make_grid(0.0, 10.0, 256)


@pytest.fixture
def sgrid():
    return symbol_grid(10.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number].line())
