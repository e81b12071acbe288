import numpy as np
import pytest

from ingestion.dataset import Dataset
from ingestion.synthetic import generate_gaussian_case


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_points():
    """x = -1 labelled -1, x = +1 labelled +1."""
    return Dataset(features=[[-1.0], [1.0]], targets=[-1.0, 1.0], name="two_points")


@pytest.fixture
def case1_small():
    return generate_gaussian_case(1, n_total=60, seed=3)


@pytest.fixture
def blobs(rng):
    """Overlapping 2-D Gaussian classes, 50 points."""
    X = np.vstack([rng.normal(0.6, 1.0, (25, 2)), rng.normal(-0.6, 1.0, (25, 2))])
    y = np.r_[np.ones(25), -np.ones(25)]
    return Dataset(features=X, targets=y, name="blobs")
