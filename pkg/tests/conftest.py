import numpy as np
import pytest

from flatcore import create_app
from flatcore.models.problem import ProblemParams, ProblemSpec
from flatcore.services.mesh import build_disk_mesh, build_rect_mesh


@pytest.fixture
def lab():
    lab = create_app('testing')
    yield lab
    lab.scheduler.stop()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope='session')
def unit_square():
    return build_rect_mesh(1.0, 1.0, 16, 16)


@pytest.fixture(scope='session')
def fine_square():
    return build_rect_mesh(1.0, 1.0, 64, 64)


@pytest.fixture(scope='session')
def unit_disk():
    return build_disk_mesh(24, 6)


def make_spec(mesh, **changes):
    return ProblemSpec(mesh, ProblemParams(**changes))
