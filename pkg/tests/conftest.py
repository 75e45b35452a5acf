import numpy as np
import pytest

from emi_ace.dictionary import build_dictionary


@pytest.fixture(scope="session")
def dsrf():
    return build_dictionary()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, dim, cond=50.0):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    evals = np.geomspace(1.0, cond, dim)
    return (q * evals) @ q.T
