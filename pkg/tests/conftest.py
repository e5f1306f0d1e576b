import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_integer_mv(rng, n=3, lo=-5, hi=6):
    from vekua_lab.clifford import Multivector

    return Multivector(n, rng.integers(lo, hi, 1 << n).astype(float))
