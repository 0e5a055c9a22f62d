"""Shared fixtures: small spaces and bands reused across test modules.

DGSpace instances are immutable after construction, so session scope is
safe and keeps the suite fast.
"""

import pytest

from bpdg.band import build_band
from bpdg.field import DGSpace
from bpdg.mesh import build_mesh


@pytest.fixture(scope="session")
def small_space():
    return DGSpace(build_mesh(4, 6, 4, 1.0, 3.0), 1)


@pytest.fixture(scope="session")
def quadratic_space():
    return DGSpace(build_mesh(3, 5, 3, 2.0, 4.0), 2)


@pytest.fixture(scope="session")
def parabolic_band():
    return build_band("parabolic", 1.0, 0.0, 3.0)


@pytest.fixture(scope="session")
def kane_band():
    return build_band("kane", 1.0, 0.5, 3.0)
