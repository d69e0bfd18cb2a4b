"""Kernel construction, kernel k-means, medoids, and cluster graphs."""

import itertools
import math

import numpy as np
import pytest

from repsel.clustering import (ClusterGraph, build_cluster_graph,
                               center_nodes, graph_to_json,
                               kernel_from_distances, kernel_kmeans,
                               outlier_scores)
from repsel.errors import KTooLarge, NonpositiveSigma


def random_distance_matrix(rng, n, dim=3):
    pts = rng.uniform(-1, 1, size=(n, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def exhaustive_min_objective(k_values, k=2):
    """Oracle: lowest objective over every bipartition, aggregate formula."""
    n = k_values.shape[0]
    assert k == 2
    best = math.inf
    for mask in range(1, 2 ** (n - 1)):
        labels = [(mask >> i) & 1 for i in range(n)]
        obj = 0.0
        for c in (0, 1):
            members = [i for i in range(n) if labels[i] == c]
            if not members:
                obj = math.inf
                break
            inner = sum(k_values[i][j] for i in members for j in members)
            obj += sum(k_values[i][i] for i in members) - inner / len(members)
        best = min(best, obj)
    return best


# --- kernel construction ------------------------------------------------------

def test_zero_distance_unit_kernel():
    d = np.zeros((3, 3))
    k = kernel_from_distances(d)
    np.testing.assert_array_equal(k.values, 1.0)
    assert k.sigma == 1.0      # zero median falls back to 1


def test_half_value_at_analytic_distance():
    sigma = 0.7
    d0 = sigma * math.sqrt(2 * math.log(2))
    d = np.array([[0.0, d0], [d0, 0.0]])
    k = kernel_from_distances(d, sigma=sigma)
    assert k.values[0, 1] == pytest.approx(0.5, abs=1e-15)


def test_kernel_matches_scripted_formula(rng):
    d = random_distance_matrix(rng, 8)
    k = kernel_from_distances(d)
    off = d[~np.eye(8, dtype=bool)]
    assert k.sigma == pytest.approx(np.median(off))
    expected = np.exp(-d ** 2 / (2 * k.sigma ** 2))
    np.testing.assert_allclose(k.values, expected, atol=1e-15)
    np.testing.assert_allclose(k.values, k.values.T, atol=0)
    np.testing.assert_array_equal(np.diag(k.values), 1.0)


def test_nonpositive_sigma_rejected():
    with pytest.raises(NonpositiveSigma):
        kernel_from_distances(np.zeros((2, 2)), sigma=0.0)


# --- kernel k-means -------------------------------------------------------------

def test_each_node_own_cluster_when_k_equals_n(rng):
    d = random_distance_matrix(rng, 5)
    k = kernel_from_distances(d)
    labels, obj = kernel_kmeans(k, k=5, seed=1)
    assert sorted(labels) == [0, 1, 2, 3, 4]
    assert obj == pytest.approx(0.0, abs=1e-12)


def test_two_nodes_two_clusters_any_seed(rng):
    d = random_distance_matrix(rng, 2)
    k = kernel_from_distances(d)
    for seed in range(6):
        labels, obj = kernel_kmeans(k, k=2, seed=seed)
        assert sorted(labels) == [0, 1]


def test_matches_exhaustive_bipartition_minimum(rng):
    for _ in range(20):
        d = random_distance_matrix(rng, 6)
        k = kernel_from_distances(d)
        _, obj = kernel_kmeans(k, k=2, seed=int(rng.integers(10_000)))
        assert obj == pytest.approx(exhaustive_min_objective(k.values),
                                    rel=1e-9, abs=1e-12)


def test_k_too_large():
    with pytest.raises(KTooLarge):
        kernel_kmeans(kernel_from_distances(np.zeros((3, 3))), k=4, seed=0)
    with pytest.raises(ValueError):
        kernel_kmeans(kernel_from_distances(np.zeros((3, 3))), k=0, seed=0)


def test_labels_invariant_under_relabeling(rng):
    d = random_distance_matrix(rng, 12)
    k = kernel_from_distances(d)
    labels, _ = kernel_kmeans(k, k=3, seed=5)
    perm = rng.permutation(12)
    k2 = kernel_from_distances(d[np.ix_(perm, perm)])
    labels2, _ = kernel_kmeans(k2, k=3, seed=5)
    # same partition up to cluster-id renaming: compare co-membership
    co1 = labels[perm][:, None] == labels[perm][None, :]
    co2 = labels2[:, None] == labels2[None, :]
    np.testing.assert_array_equal(co1, co2)


# --- medoids ------------------------------------------------------------------

def test_singleton_cluster_center_is_itself():
    k = kernel_from_distances(np.array([[0.0, 0.9], [0.9, 0.0]]), sigma=1.0)
    centers = center_nodes(k, np.array([0, 1]))
    np.testing.assert_array_equal(centers, [0, 1])


def test_center_is_highest_average_similarity():
    # node 1 is close to both others; nodes 0 and 2 are far apart
    values = np.array([[1.0, 0.9, 0.2],
                       [0.9, 1.0, 0.9],
                       [0.2, 0.9, 1.0]])
    centers = center_nodes(type("K", (), {"values": values}),
                           np.array([0, 0, 0]))
    np.testing.assert_array_equal(centers, [1])


def test_centers_match_exhaustive_argmin(rng):
    d = random_distance_matrix(rng, 10)
    kern = kernel_from_distances(d)
    labels, _ = kernel_kmeans(kern, k=3, seed=2)
    centers = center_nodes(kern, labels)
    feat = (np.diag(kern.values)[:, None] + np.diag(kern.values)[None, :]
            - 2 * kern.values)
    for c, center in enumerate(centers):
        members = np.flatnonzero(labels == c)
        costs = {i: sum(feat[i][j] for j in members) for i in members}
        best = min(costs.values())
        expected = min(i for i in members if costs[i] <= best + 1e-12)
        assert center == expected
        assert labels[center] == c


# --- outlier scores ---------------------------------------------------------------

def test_center_scores_zero(rng):
    d = random_distance_matrix(rng, 9)
    kern = kernel_from_distances(d)
    labels, _ = kernel_kmeans(kern, k=2, seed=0)
    centers = center_nodes(kern, labels)
    scores = outlier_scores(kern, labels, centers)
    assert np.all(scores >= 0)
    for c, center in enumerate(centers):
        assert scores[center] == 0.0
        members = np.flatnonzero(labels == c)
        assert scores[center] == scores[members].min()


def test_score_analytic_value():
    values = np.array([[1.0, 0.5], [0.5, 1.0]])
    scores = outlier_scores(type("K", (), {"values": values}),
                            np.array([0, 0]), np.array([0]))
    assert scores[1] == pytest.approx(1.0, abs=1e-15)


def test_score_ranking_matches_embedded_distances(rng):
    # Euclidean input distances embed exactly; the kernel-induced distance is
    # monotone in the original one, so rankings agree
    from repsel.embedding import mds_embed
    d = random_distance_matrix(rng, 12)
    kern = kernel_from_distances(d)
    labels = np.zeros(12, dtype=int)
    centers = center_nodes(kern, labels)
    scores = outlier_scores(kern, labels, centers)
    emb = mds_embed(d)
    ref = np.linalg.norm(emb.points - emb.points[centers[0]], axis=1)
    np.testing.assert_array_equal(np.argsort(scores, kind="stable"),
                                  np.argsort(ref, kind="stable"))


# --- cluster graph ---------------------------------------------------------------

def test_identical_nodes_graph(rng):
    graph = build_cluster_graph(np.zeros((6, 6)), k=2, seed=3)
    assert graph.objective == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(graph.outlier_scores, 0.0, atol=1e-9)
    assert sorted(np.bincount(graph.labels, minlength=2)) != [0, 6]


def test_graph_deterministic(rng):
    d = random_distance_matrix(rng, 15)
    g1 = build_cluster_graph(d, k=3, seed=11)
    g2 = build_cluster_graph(d, k=3, seed=11)
    np.testing.assert_array_equal(g1.labels, g2.labels)
    np.testing.assert_array_equal(g1.centers, g2.centers)
    np.testing.assert_array_equal(g1.embedding.points, g2.embedding.points)
    assert g1.objective == g2.objective


def test_planted_families_recovered():
    from sklearn.metrics import adjusted_rand_score

    from repsel.ensemble import (ChannelFamily, SyntheticSpec,
                                 generate_synthetic_ensemble)
    from repsel.similarity import similarity_matrix, to_distance

    spec = SyntheticSpec(
        dims=(20, 20, 5), realizations_per_family=8, seed=31,
        families=(ChannelFamily(0.0, 3.0, 2.0),
                  ChannelFamily(90.0, 3.0, 4.0),
                  ChannelFamily(45.0, 3.0, 6.0)))
    result = generate_synthetic_ensemble(spec)
    sim = similarity_matrix(result.ensemble, "PERMX",
                            result.channel_cells, bins=16)
    graph = build_cluster_graph(to_distance(sim), k=3, seed=0)
    ari = adjusted_rand_score(result.family_labels, graph.labels)
    assert ari >= 0.8
    # every center sits in the dominant family of its cluster
    for c, center in enumerate(graph.centers):
        members = np.flatnonzero(graph.labels == c)
        fams, counts = np.unique(result.family_labels[members],
                                 return_counts=True)
        assert result.family_labels[center] == fams[np.argmax(counts)]


def test_graph_json_shape(rng):
    d = random_distance_matrix(rng, 7)
    graph = build_cluster_graph(d, k=2, seed=1)
    doc = graph_to_json(graph)
    assert doc["k"] == 2
    assert len(doc["nodes"]) == 7
    assert sum(n["is_center"] for n in doc["nodes"]) == 2
    node = doc["nodes"][0]
    assert set(node) == {"id", "xyz", "cluster", "score", "is_center"}
