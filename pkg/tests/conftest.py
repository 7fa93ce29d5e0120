import numpy as np
import pytest

from selfsim import Family, KernelSpec, RngStream, sample_path

MASTER_SEED = 20260810


@pytest.fixture(scope="session")
def rng_factory():
    def make(stream: int) -> RngStream:
        return RngStream(MASTER_SEED, stream)

    return make


@pytest.fixture(scope="session")
def fbm_path_factory(rng_factory):
    def make(H: float, n: int, stream: int, sigma2: float = 1.0):
        spec = KernelSpec(Family.FBM, H=H, sigma2=sigma2)
        return sample_path(spec, n, rng_factory(stream))

    return make


def batch_estimates(estimator, paths):
    return np.array([estimator(p) for p in paths])
