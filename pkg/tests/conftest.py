import numpy as np
import pytest

from platoonrisk import PlatoonParams, build_topology, laplacian, spectrum
from platoonrisk.graphs import WeightedGraph


@pytest.fixture(scope="session")
def base_params():
    """Reference case-study parameters: n=11, d=1.01, c=1.21, tau=0.01,
    beta=1/3, g=1, eps=0.1."""
    return PlatoonParams()


@pytest.fixture(scope="session")
def k11_spectrum():
    return spectrum(laplacian(build_topology("complete", 11)))


def random_connected_graph(rng: np.random.Generator, n: int) -> WeightedGraph:
    """Random connected weighted graph: spanning tree plus extra edges."""
    edges = {}
    perm = rng.permutation(n) + 1
    for k in range(1, n):
        i = int(perm[k])
        j = int(perm[rng.integers(0, k)])
        edges[(min(i, j), max(i, j))] = float(rng.uniform(0.5, 1.5))
    n_extra = int(rng.integers(0, n))
    for _ in range(n_extra):
        i, j = rng.integers(1, n + 1, size=2)
        if i != j:
            key = (min(int(i), int(j)), max(int(i), int(j)))
            edges.setdefault(key, float(rng.uniform(0.5, 1.5)))
    edge_list = tuple((i, j, w) for (i, j), w in sorted(edges.items()))
    return WeightedGraph(n=n, edges=edge_list)
