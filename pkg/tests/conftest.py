import math

import pytest

from formflex.geometry import LipGeometry
from formflex.pneumatics import AirEnvironment

# worked example shared by most modules: r=30 mm, R=40 mm, 30 deg cone,
# 2 mm lip, 5 MPa rubber, d_theta=0.1 rad, Q=0.01 m^3/s
D_THETA = 0.1
Q = 0.01


@pytest.fixture
def geom():
    return LipGeometry(r=0.03, R=0.04, alpha=math.pi / 6, b=0.002, E=5e6)


@pytest.fixture
def env():
    return AirEnvironment()


def rel(a, b):
    return abs(a - b) / abs(b)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
