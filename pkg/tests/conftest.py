import numpy as np
import pytest

from sampdens import SurfaceModel


@pytest.fixture(scope="session")
def plane():
    return SurfaceModel.plane()


@pytest.fixture(scope="session")
def disk():
    return SurfaceModel.unit_disk()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_disk_points(rng, n, rmax=0.9):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def random_plane_points(rng, n, box=3.0):
    return rng.uniform(-box, box, n) + 1j * rng.uniform(-box, box, n)
