import numpy as np
import pytest

from tensorsmooth.core.config import settings
from tensorsmooth.engine.basis import build_basis
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.services.simulate import simulate


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale runs (minutes); deselect with -m 'not slow'")


@pytest.fixture(autouse=True)
def restore_settings():
    saved = settings.model_dump()
    yield
    for key, value in saved.items():
        setattr(settings, key, value)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_bases():
    """Equidistant bases on [0, 1] with the requested dimensions."""

    def make(dims, degree=3):
        return [build_basis((0.0, 1.0), J - degree - 1, degree) for J in dims]

    return make


@pytest.fixture
def make_spline_design(rng, make_bases):
    """Tensor design of B-spline bases at uniform random points."""

    def make(dims, n, degree=3):
        bases = make_bases(dims, degree)
        columns = [rng.uniform(0.0, 1.0, n) for _ in dims]
        return bases, TensorDesign.from_bases(bases, columns)

    return make


@pytest.fixture
def smooth_2d():
    table, truth = simulate("smooth_2d", 400, noise_sd=0.1, seed=7)
    return table, truth
