import numpy as np
import pytest
from oracles import count_components, random_disconnected_graph

from pec.baselines import agglomerate, hca, normalized_laplacian, spectral_cluster, spectral_embedding
from pec.srg import build_srg_from_adjacency


# -- spectral embedding ---------------------------------------------------------


def test_k3_eigenvalues():
    g = build_srg_from_adjacency([("a", "b"), ("b", "c"), ("a", "c")])
    emb = spectral_embedding(g, 3)
    assert np.allclose(emb.eigenvalues, [0.0, 1.5, 1.5], atol=1e-8)


def test_zero_eigenvalue_multiplicity_equals_components():
    rng = np.random.default_rng(19)
    for _ in range(10):
        g, expected = random_disconnected_graph(rng)
        assert expected == count_components(g)
        emb = spectral_embedding(g, g.num_nodes)
        multiplicity = int(np.sum(emb.eigenvalues < 1e-8))
        assert multiplicity == expected


def test_eigenpair_residuals():
    rng = np.random.default_rng(29)
    for _ in range(5):
        g, _ = random_disconnected_graph(rng)
        lap = normalized_laplacian(g)
        emb = spectral_embedding(g, g.num_nodes)
        for k in range(g.num_nodes):
            v = emb.vectors[:, k]
            residual = np.max(np.abs(lap @ v - emb.eigenvalues[k] * v))
            assert residual <= 1e-8


def test_eigenvalues_in_normalized_bound():
    rng = np.random.default_rng(37)
    g, _ = random_disconnected_graph(rng)
    emb = spectral_embedding(g, g.num_nodes)
    assert np.all(emb.eigenvalues >= 0.0)
    assert np.all(emb.eigenvalues <= 2.0)
    assert np.all(np.diff(emb.eigenvalues) >= -1e-12)


def test_eigenvector_columns_orthonormal():
    rng = np.random.default_rng(41)
    g, _ = random_disconnected_graph(rng)
    emb = spectral_embedding(g, min(4, g.num_nodes))
    gram = emb.vectors.T @ emb.vectors
    assert np.allclose(gram, np.eye(emb.vectors.shape[1]), atol=1e-6)


def test_spectral_cluster_separates_disconnected_triangles():
    g = build_srg_from_adjacency(
        [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")]
    )
    result = spectral_cluster(g, d=2, n=2, seed=0)
    first = {result.labels[g.index(x)] for x in "abc"}
    second = {result.labels[g.index(x)] for x in "def"}
    assert len(first) == 1 and len(second) == 1 and first != second


def test_spectral_rejects_edgeless_and_bad_d():
    g = build_srg_from_adjacency([], node_ids=["a", "b"])
    with pytest.raises(ValueError, match="edge"):
        spectral_embedding(g, 1)
    g2 = build_srg_from_adjacency([("a", "b")])
    with pytest.raises(ValueError, match="d"):
        spectral_embedding(g2, 3)


# -- agglomerative clustering ------------------------------------------------------


def test_hca_three_point_example():
    x = np.array([[0.0], [1.0], [10.0]])
    result = hca(x=x, linkage="average", n=2)
    assert result.labels[0] == result.labels[1] != result.labels[2]
    assert np.allclose(sorted(result.centroids.ravel()), [0.5, 10.0])


def test_hca_singletons_at_n_equals_points():
    x = np.array([[0.0], [3.0], [9.0]])
    result = hca(x=x, linkage="complete", n=3)
    assert sorted(result.labels.tolist()) == [0, 1, 2]
    assert result.inertia == pytest.approx(0.0, abs=1e-12)


def test_hca_single_linkage_recovers_chains():
    # two chains with internal gap 1, separated by 10
    left = np.array([[float(i), 0.0] for i in range(5)])
    right = np.array([[float(i), 15.0] for i in range(5)])
    x = np.vstack([left, right])
    result = hca(x=x, linkage="single", n=2)
    assert len(set(result.labels[:5].tolist())) == 1
    assert len(set(result.labels[5:].tolist())) == 1
    assert result.labels[0] != result.labels[9]


def test_merge_distances_non_decreasing_for_complete_and_average():
    rng = np.random.default_rng(57)
    for linkage in ("complete", "average"):
        x = rng.normal(size=(12, 3))
        sq = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
        merges = agglomerate(np.sqrt(sq), linkage)
        dists = [d for _, _, d in merges]
        assert all(b >= a - 1e-12 for a, b in zip(dists, dists[1:]))


def test_hca_distance_matrix_input():
    dist = np.array(
        [
            [0.0, 1.0, 8.0],
            [1.0, 0.0, 8.5],
            [8.0, 8.5, 0.0],
        ]
    )
    result = hca(distances=dist, linkage="complete", n=2)
    assert result.labels[0] == result.labels[1] != result.labels[2]
    assert result.centroids is None


def test_hca_deterministic_tie_break():
    # four equidistant-ish points with exact ties: smallest pair indices first
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    merges = agglomerate(np.abs(x - x.T), "single")
    assert merges[0][:2] == (0, 1)


def test_hca_input_validation():
    with pytest.raises(ValueError, match="exactly one"):
        hca(x=np.zeros((3, 1)), distances=np.zeros((3, 3)))
    with pytest.raises(ValueError, match="linkage"):
        agglomerate(np.zeros((2, 2)), "centroid")
    with pytest.raises(ValueError, match="n"):
        hca(x=np.zeros((3, 1)), n=4)
