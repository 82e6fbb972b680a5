import numpy as np
import pytest

from xover import fixtures
from xover.design import Design
from xover.oracles import random_eligible_design


@pytest.fixture(scope="session")
def ex1() -> Design:
    return fixtures.load("ex1")


@pytest.fixture(scope="session")
def ex2() -> Design:
    return fixtures.load("ex2")


@pytest.fixture(scope="session")
def ex5() -> Design:
    return fixtures.load("ex5")


@pytest.fixture(scope="session")
def ex7() -> Design:
    return fixtures.load("ex7")


def random_connected_design(t: int, p: int, n: int, seed: int) -> Design:
    """Any-label random design (not necessarily eligible), seeded."""
    rng = np.random.default_rng(seed)
    while True:
        grid = rng.integers(0, t + 1, size=(p, n))
        if len(np.unique(grid)) == t + 1:
            return Design(t=t, grid=grid)


def eligible_sample(count: int, seed: int = 0) -> list[Design]:
    """Seeded eligible designs across a small shape sweep."""
    shapes = [(2, 3, 6), (3, 3, 9), (3, 4, 8), (4, 3, 12), (4, 4, 8),
              (5, 4, 12), (5, 5, 10), (6, 5, 10), (7, 5, 15)]
    designs = []
    i = 0
    while len(designs) < count:
        t, p, n = shapes[i % len(shapes)]
        designs.append(random_eligible_design(t, p, n, seed=seed + i))
        i += 1
    return designs
