import numpy as np
import pytest

from mortarfem.analysis import Problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lshape_problem():
    return Problem()


@pytest.fixture(scope="session")
def lshape_system(lshape_problem):
    return lshape_problem.system(6)


@pytest.fixture(scope="session")
def square_k2_system():
    pb = Problem(partition="unit-square-2x1", degree=2, alphas=(1.0, 1.0), solution="smooth", cell_offsets=(0, 2))
    return pb.system(4)
