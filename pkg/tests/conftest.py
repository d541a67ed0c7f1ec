import numpy as np
import pytest

from fpcount.services.arith import build_sieve
from fpcount.services.semigroup import sample_coprime_pairs


@pytest.fixture(scope="session")
def tables():
    return build_sieve(200_000)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240917))


@pytest.fixture
def coprime_pairs(rng):
    def sample(count, max_product):
        return sample_coprime_pairs(rng, count, max_product)
    return sample
