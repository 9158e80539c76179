import numpy as np
import pytest

from firefront import fixtures
from firefront.metric import ZermeloData
from firefront.wind import ConstantWind

SQRT3 = np.sqrt(3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def demo1_data():
    """Constant wind over the rotated-ellipsoid burn pattern."""
    return fixtures.example1_data()


@pytest.fixture
def demo1_wind():
    return np.array([0.0, 1.0 / 3.0, 1.0 / 6.0])


@pytest.fixture
def demo1_metric():
    return fixtures.example1_metric_matrix()


@pytest.fixture
def demo2_data():
    """Shear wind over the y-rotated burn pattern."""
    return fixtures.example2_data(0.1)


@pytest.fixture
def euclid_data():
    return ZermeloData(metric=np.eye(3), wind=np.zeros(3))


def random_spd(rng, scale=1.0):
    a = rng.normal(size=(3, 3))
    return scale * (a @ a.T + 0.3 * np.eye(3))


def random_admissible_wind(rng, h):
    w = rng.normal(size=3)
    norm = np.sqrt(w @ h @ w)
    return w * rng.uniform(0.0, 0.9) / max(norm, 1e-12)


@pytest.fixture
def random_zermelo(rng):
    def make():
        h = random_spd(rng)
        w = random_admissible_wind(rng, h)
        return ZermeloData(metric=h, wind=ConstantWind(w)), h, w

    return make
