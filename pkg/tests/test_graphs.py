import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platoonrisk import GraphError, build_topology, graph_from_spec, laplacian, spectrum
from platoonrisk.graphs import WeightedGraph

from conftest import random_connected_graph


def test_complete_graph_laplacian():
    g = build_topology("complete", 5)
    L = laplacian(g)
    assert np.allclose(L, 5 * np.eye(5) - np.ones((5, 5)))


def test_complete_graph_spectrum():
    spec = spectrum(laplacian(build_topology("complete", 11)))
    assert spec.eigenvalues[0] == 0.0
    assert np.allclose(spec.eigenvalues[1:], 11.0)


def test_plain_ring_is_pcycle_p2():
    g = build_topology("pcycle", 5, p=2)
    pairs = {(i, j) for i, j, _ in g.edges}
    assert pairs == {(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)}


def test_pcycle_p8_n11_degrees_and_reproducibility():
    g1 = build_topology("pcycle", 11, p=8, weights=(0.8, 1.2), seed=7)
    g2 = build_topology("pcycle", 11, p=8, weights=(0.8, 1.2), seed=7)
    assert len(g1.edges) == 11 * 8 // 2
    deg = np.zeros(12)
    for i, j, w in g1.edges:
        assert 0.8 <= w <= 1.2
        deg[i] += 1
        deg[j] += 1
    assert np.all(deg[1:] == 8)
    assert g1 == g2
    g3 = build_topology("pcycle", 11, p=8, weights=(0.8, 1.2), seed=8)
    assert g1 != g3


def test_ring_spectrum_matches_circulant_formula():
    n = 11
    g = build_topology("pcycle", n, p=2)
    spec = spectrum(laplacian(g))
    expected = np.sort(2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n))
    assert np.allclose(spec.eigenvalues, expected, atol=1e-10)


def test_path_spectrum_matches_closed_form():
    n = 11
    spec = spectrum(laplacian(build_topology("path", n)))
    expected = np.sort(2.0 - 2.0 * np.cos(np.pi * np.arange(n) / n))
    assert np.allclose(spec.eigenvalues, expected, atol=1e-10)
    # the top eigenvalue sits between 2 and 4 for the unweighted path
    assert 2.0 < spec.lambda_max < 4.0


def test_spectrum_against_lapack():
    rng = np.random.default_rng(42)
    for n in (3, 5, 8, 13):
        g = random_connected_graph(rng, n)
        L = laplacian(g)
        spec = spectrum(L)
        ref = np.linalg.eigvalsh(L)
        ref[0] = 0.0
        assert np.allclose(spec.eigenvalues, ref, atol=1e-9)
        res = np.max(np.linalg.norm(
            L @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues, axis=0))
        assert res < 1e-8


def test_spectrum_orthonormal_and_pinned_null_vector():
    g = build_topology("pcycle", 11, p=4, weights=(0.8, 1.2), seed=3)
    spec = spectrum(laplacian(g))
    Q = spec.eigenvectors
    assert np.max(np.abs(Q.T @ Q - np.eye(11))) < 1e-9
    assert np.allclose(Q[:, 0], 1.0 / np.sqrt(11))


def test_invalid_topologies_rejected():
    with pytest.raises(GraphError):
        build_topology("pcycle", 11, p=3)  # odd p
    with pytest.raises(GraphError):
        build_topology("pcycle", 11, p=12)  # p > n-1
    with pytest.raises(GraphError):
        build_topology("star", 5)
    with pytest.raises(GraphError):
        build_topology("complete", 1)
    with pytest.raises(GraphError):
        build_topology("complete", 5, weights=-1.0)


def test_disconnected_and_malformed_graphs_rejected():
    with pytest.raises(GraphError):
        WeightedGraph(n=4, edges=((1, 2, 1.0), (3, 4, 1.0)))
    with pytest.raises(GraphError):
        WeightedGraph(n=3, edges=((1, 1, 1.0), (2, 3, 1.0)))  # self loop
    with pytest.raises(GraphError):
        WeightedGraph(n=3, edges=((1, 2, 1.0), (2, 1, 2.0), (2, 3, 1.0)))  # dup
    with pytest.raises(GraphError):
        WeightedGraph(n=3, edges=((1, 2, 0.0), (2, 3, 1.0)))  # zero weight


def test_graph_from_spec_roundtrip():
    doc = {"kind": "pcycle", "n": 11, "p": 8,
           "weights": {"range": [0.8, 1.2], "seed": 7}}
    assert graph_from_spec(doc) == build_topology("pcycle", 11, p=8,
                                                  weights=(0.8, 1.2), seed=7)
    doc = {"kind": "explicit", "n": 3, "edges": [[1, 2, 0.5], [2, 3, 2.0]]}
    g = graph_from_spec(doc)
    assert g.edges == ((1, 2, 0.5), (2, 3, 2.0))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=2**32))
def test_laplacian_rows_sum_to_zero_and_psd(n, seed):
    g = random_connected_graph(np.random.default_rng(seed), n)
    L = laplacian(g)
    assert np.max(np.abs(L.sum(axis=1))) < 1e-12
    assert np.min(np.linalg.eigvalsh(L)) > -1e-10
