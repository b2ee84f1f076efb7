import numpy as np
import pytest

from dksel.models import QueryContext
from dksel.pool import make_query, validate_pool

from helpers import random_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def three_item_pool():
    """Three rows whose relevance to (1, 0) is (0.9, 0.1, 0.5)"""
    rows = [[0.9, np.sqrt(1 - 0.81)], [0.1, np.sqrt(1 - 0.01)], [0.5, np.sqrt(1 - 0.25)]]
    return validate_pool(np.asarray(rows, dtype=np.float32))


@pytest.fixture
def three_item_query(three_item_pool) -> QueryContext:
    return make_query(three_item_pool, [1.0, 0.0], query_id='q-three', gold=[0, 2])


@pytest.fixture
def orthonormal_pool():
    return validate_pool(np.eye(4, dtype=np.float32))


@pytest.fixture
def clustered_instance(rng):
    return random_instance(rng, 12, 4, clusters=3)
