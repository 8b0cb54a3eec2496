import numpy as np
import pytest

from neckscope.warped import (
    cylinder_spec,
    flare_spec,
    flat_spec,
    make_metric,
    sphere_spec,
)


@pytest.fixture(scope="session")
def flat():
    return make_metric(flat_spec(t_max=100.0))


@pytest.fixture(scope="session")
def cyl():
    return make_metric(cylinder_spec(1.0, t_min=-60.0, t_max=60.0))


@pytest.fixture(scope="session")
def sphere1():
    return make_metric(sphere_spec(1.0))


@pytest.fixture(scope="session")
def flare03():
    return make_metric(flare_spec(0.3, t_max=200.0))


@pytest.fixture(scope="session")
def flare005():
    return make_metric(flare_spec(0.05, t_max=400.0))


def random_unit(rng, n=3):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)
