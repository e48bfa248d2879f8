import numpy as np
import pytest

from ergolab.cross_section import greedy_net
from ergolab.group_core import QuadratureScheme, Window, make_group


@pytest.fixture(scope="session")
def line():
    return make_group("R")


@pytest.fixture(scope="session")
def plane():
    return make_group("R2")


@pytest.fixture(scope="session")
def lattice():
    return make_group("Zd", 1)


@pytest.fixture(scope="session")
def affine():
    return make_group("affine")


@pytest.fixture(scope="session")
def net_2z(line):
    """The even-integer net on [-8, 8]; tiles are unit-radius intervals."""
    return greedy_net(Window.box([(-8.0, 8.0)]), 2.0, line, scan_step=0.5)


@pytest.fixture(scope="session")
def net_2z_wide(line):
    """Same spacing on [-64, 64]; enough tiles for deep dyadic levels."""
    return greedy_net(Window.box([(-64.0, 64.0)]), 2.0, line, scan_step=0.5)


@pytest.fixture(scope="session")
def quad():
    return QuadratureScheme("grid", 512)


@pytest.fixture(scope="session")
def quad_fine():
    return QuadratureScheme("grid", 4001)


def uniform_points(window, count, seed, model=None):
    rng = np.random.default_rng(seed)
    pts = window.lo + rng.random((count, window.dim)) * window.widths
    return pts
