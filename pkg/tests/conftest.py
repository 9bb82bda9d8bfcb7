"""Shared fixtures: the two canonical meshes and their symmetric metric."""

import numpy as np
import pytest

from hypflow import instances


@pytest.fixture
def pants():
    return instances.pair_of_pants()


@pytest.fixture
def torus():
    return instances.one_holed_torus()


@pytest.fixture
def symmetric_l0():
    # cosh(l0/2) = 2 for every edge; both canonical meshes have 3 edges
    return np.full(3, instances.PANTS_EDGE_LENGTH)
