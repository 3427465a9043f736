import numpy as np
import pytest

from cyclecancel.fixtures import load_fixture
from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix


def random_matrix(rng, n, low=1, high=99, missing=0.0):
    a = rng.integers(low, high, size=(n, n), endpoint=True)
    if missing:
        a[rng.random((n, n)) < missing] = INF
    np.fill_diagonal(a, INF)
    return CostMatrix(a)


@pytest.fixture(scope="session")
def m34():
    return load_fixture("ex34")


@pytest.fixture(scope="session")
def m35():
    return load_fixture("ex35")


@pytest.fixture(scope="session")
def m32():
    return load_fixture("ex32")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
