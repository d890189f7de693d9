import numpy as np
import pytest

from nldiff import kernel
from nldiff.fields import Grid


@pytest.fixture(scope="session")
def kern1():
    return kernel.make_kernel("epanechnikov", 1.0, 1)


@pytest.fixture(scope="session")
def kern2():
    return kernel.make_kernel("epanechnikov", 1.0, 2)


@pytest.fixture(scope="session")
def grid_small():
    return Grid(1, 1024, 16.0)


@pytest.fixture(scope="session")
def grid_medium():
    return Grid(1, 4096, 32.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
