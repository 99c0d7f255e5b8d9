import pytest

from wedgelab.quadrature import QuadratureSpec
from wedgelab.smatrix import build_bullough_dodd, build_general
from wedgelab.wedgefn import make_bump

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def S05():
    return build_bullough_dodd(0.5)


@pytest.fixture(scope="session")
def S15():
    return build_bullough_dodd(1.5)


@pytest.fixture(scope="session")
def S3():
    return build_general([0.5, 0.3, 1.7])


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def f_left():
    return make_bump((0.0, -1.0), 0.6, 1.0, "left")


@pytest.fixture(scope="session")
def g_right():
    return make_bump((0.1, 1.1), 0.55, 1.0, "right")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
