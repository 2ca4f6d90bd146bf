import numpy as np
import pytest

from glauberopt import DefaultMeasure, build_graph, generate_iid


@pytest.fixture(scope="session")
def path4():
    return build_graph(4, [(1, 2), (2, 3), (3, 4)])


@pytest.fixture(scope="session")
def uniform_mu0():
    return DefaultMeasure.uniform(4, 2)


@pytest.fixture(scope="session")
def small_schedule(path4):
    """Short i.i.d. schedule on the path graph for quick module tests."""
    return generate_iid(path4, 2, 60, 4242, 1.0)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(987)))
