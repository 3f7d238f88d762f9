import numpy as np
import pytest

from dualorlicz.geometry import random_star
from dualorlicz.integrate import build_rule


def pair(n: int, seed: int):
    rng = np.random.default_rng(seed)
    return random_star(n, rng), random_star(n, rng)


@pytest.fixture(scope="session")
def rule2():
    return build_rule(2, 256)


@pytest.fixture(scope="session")
def rule3():
    return build_rule(3, 32)


@pytest.fixture(scope="session")
def nodes2():
    return build_rule(2, 128).nodes
