import numpy as np
import pytest

from vicseklab.graph import build_level_graph
from vicseklab.spectral import eigendecompose

_GRAPHS = {}
_DECOMPS = {}


def get_graph(m):
    if m not in _GRAPHS:
        _GRAPHS[m] = build_level_graph(m)
    return _GRAPHS[m]


def get_decomposition(m):
    if m not in _DECOMPS:
        _DECOMPS[m] = eigendecompose(get_graph(m))
    return _DECOMPS[m]


@pytest.fixture(scope="session")
def graphs():
    """Graph accessor shared across the whole run (construction is cheap,
    but identity-sharing keeps function/graph checks strict)."""
    return get_graph


@pytest.fixture(scope="session")
def decompositions():
    """Cached dense eigendecompositions (m = 4 costs a few seconds)."""
    return get_decomposition


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
