import numpy as np
import pytest

from celab.ratmap import RationalMap


@pytest.fixture
def cheb():
    return RationalMap.from_coeffs([-2, 0, 1], name="chebyshev")


@pytest.fixture
def misi():
    return RationalMap.from_coeffs([1j, 0, 1], name="misiurewicz_i")


@pytest.fixture
def sq():
    return RationalMap.from_coeffs([0, 0, 1], name="power2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_map(rng, d=None, rational=None):
    d = d or int(rng.integers(2, 5))
    rational = rng.random() < 0.5 if rational is None else rational
    while True:
        num = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        if rational:
            den = rng.normal(size=d) + 1j * rng.normal(size=d)
        else:
            den = [1.0]
        try:
            return RationalMap.from_coeffs(num, den)
        except ValueError:
            continue
