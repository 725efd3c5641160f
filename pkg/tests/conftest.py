import numpy as np
import pytest

from specgap import Graph


@pytest.fixture
def path2():
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def star4():
    # K_{1,3} with the hub at node 0
    return Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def two_triangles_bridge():
    return Graph.from_edges(
        6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])


def random_graph(rng: np.random.Generator, n: int, p: float = 0.5,
                 weighted: bool = False, require_connected: bool = False) -> Graph:
    """Seeded Erdos-Renyi helper shared by several test modules."""
    while True:
        iu, iv = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < p
        if not keep.any():
            continue
        w = rng.uniform(0.2, 2.0, int(keep.sum())) if weighted \
            else np.ones(int(keep.sum()))
        g = Graph(n, iu[keep], iv[keep], w)
        if not require_connected or g.is_connected():
            return g
