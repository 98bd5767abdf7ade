import sys

import pytest

from hybrid_sim.algebra import AlgebraParams, PacketSpec, gaussian_state, make_grid


@pytest.fixture
def reduced_grid():
    return make_grid({"x1": (64, 24.0), "chi1": (64, 24.0)})


@pytest.fixture
def small_grid():
    return make_grid({"x1": (16, 16.0), "chi1": (16, 16.0), "x2": (16, 16.0), "chi2": (16, 16.0)})


@pytest.fixture
def qq():
    return AlgebraParams(1.0, 1.0)


def packet_state(grid, algebra, *packets):
    return gaussian_state(grid, algebra, [PacketSpec(**p) for p in packets])



def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
