import numpy as np
import pytest

from cornergb import catalog
from cornergb.scene import parse_scene

# A non-diagonal, non-symmetric-looking metric on the unit box with one M-N corner.
GENERIC_SCENE = """\
name = generic
chi = 1

[chart box]
box = [0,1]x[0,1]x[0,1]x[0,1]
g_11 = 1 + 0.3*x1*x2 + 0.1*x3^2
g_12 = 0.1*sin(x3 + x4)
g_13 = 0.05*x1*x4
g_14 = 0.02*x2^2
g_22 = 1.2 + 0.2*cos(x1) + 0.1*x4^3
g_23 = 0.07*x1*x2*x3
g_24 = -0.04*x3
g_33 = exp(0.2*x1 - 0.1*x2)
g_34 = 0.1*x1*x4
g_44 = 0.9 + 0.1*x2*x3 + 0.05*x1^2*x4
face x1=lo : glue
face x1=hi : M
face x2=lo : N
face x2=hi : glue
face x3=lo : glue
face x3=hi : glue
face x4=lo : glue
face x4=hi : glue
"""

GENERIC_OMEGA = "0.1*x1*x2 - 0.05*sin(x3 + 2*x4) + 0.03*x2^2*x4"

FLAT_BOX = """\
name = flat_box
chi = 1

[chart box]
box = [0,1]x[0,1]x[0,1]x[0,1]
g_11 = 1
g_22 = 1
g_33 = 1
g_44 = 1
face x1=lo : glue
face x1=hi : glue
face x2=lo : glue
face x2=hi : glue
face x3=lo : M
face x3=hi : glue
face x4=lo : N
face x4=hi : glue
"""


@pytest.fixture(scope="session")
def generic_scene():
    return parse_scene(GENERIC_SCENE)


@pytest.fixture(scope="session")
def generic_chart(generic_scene):
    return generic_scene.charts[0]


@pytest.fixture(scope="session")
def flat_box():
    return parse_scene(FLAT_BOX)


@pytest.fixture(scope="session")
def entries():
    return {name: catalog.get(name) for name in catalog.catalog_names()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
