import pytest

from pyramidgh import WorkerPool
from pyramidgh.zoo import corpus as build_corpus


@pytest.fixture
async def pool() -> WorkerPool:
    async with WorkerPool(2) as workers:
        yield workers


@pytest.fixture(scope="session")
def corpus() -> list:
    return build_corpus(0)


@pytest.fixture(scope="session")
def small_corpus() -> list:
    return build_corpus(0, max_points=3)
