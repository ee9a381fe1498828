import numpy as np
import pytest

from chg.hermitian import project_to_boundary


def cvec(rng, m):
    return rng.normal(size=m) + 1j * rng.normal(size=m)


def boundary_point(rng, n):
    return project_to_boundary(cvec(rng, n + 1)).coords


def unit(i, m):
    e = np.zeros(m, dtype=complex)
    e[i] = 1
    return e


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
