import numpy as np
import pytest

from nearnet import EuclideanSpace, LabeledSample, PreissParams, PreissSpace
from nearnet.preiss import sample_preiss


@pytest.fixture
def plane():
    return EuclideanSpace(dim=2)


@pytest.fixture
def line():
    return EuclideanSpace(dim=1)


@pytest.fixture
def preiss_params():
    return PreissParams(alpha=0.3)


@pytest.fixture
def preiss_space(preiss_params):
    return PreissSpace(preiss_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_plane_sample(rng, n, n_labels=2) -> LabeledSample:
    return LabeledSample(
        points=rng.random((n, 2)), labels=rng.integers(0, n_labels, size=n)
    )


def random_preiss_sample(rng, n, params) -> LabeledSample:
    return sample_preiss(rng, n, params)
