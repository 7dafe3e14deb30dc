import numpy as np
import pytest

from coqam import FrameParams, gen_gaussian, gen_raised_cosine, orthogonalize_oqam


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ref_params():
    return FrameParams(128, 9)


@pytest.fixture(scope="session")
def dzt_gaussian(ref_params):
    return orthogonalize_oqam(gen_gaussian(ref_params, 0.1), ref_params)


@pytest.fixture(scope="session")
def dzt_rc(ref_params):
    return orthogonalize_oqam(gen_raised_cosine(ref_params, 0.3), ref_params)
