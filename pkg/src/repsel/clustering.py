"""Kernel k-means over MI-derived distances, medoid centers, outlier scores.

Clustering runs on the distance matrix directly (Gaussian kernel, median
bandwidth); the MDS embedding supplies display coordinates only. Lloyd
iterations in feature space with k-means++ style seeding, 10 seeded restarts,
and deterministic tie-breaking make the result a pure function of
(distances, k, seed).
"""

from dataclasses import dataclass

import numpy as np

from .embedding import Embedding3D, mds_embed
from .errors import KTooLarge, NonpositiveSigma

RESTARTS = 10
MAX_ITERATIONS = 300


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray     # (R, R), symmetric, unit diagonal, entries (0, 1]
    sigma: float


@dataclass(frozen=True)
class ClusterGraph:
    labels: np.ndarray
    k: int
    centers: np.ndarray          # node index per cluster id
    embedding: Embedding3D
    distances: np.ndarray        # the input distance matrix
    objective: float
    outlier_scores: np.ndarray


def kernel_from_distances(distances, sigma=None) -> KernelMatrix:
    """Gaussian kernel exp(-d^2 / 2 sigma^2); sigma defaults to the median
    off-diagonal distance (or 1 when that median is 0)."""
    d = np.asarray(getattr(distances, "values", distances), dtype=float)
    if sigma is None:
        off = d[~np.eye(d.shape[0], dtype=bool)]
        med = float(np.median(off)) if off.size else 0.0
        sigma = med if med > 0.0 else 1.0
    elif sigma <= 0.0:
        raise NonpositiveSigma(f"sigma must be positive, got {sigma}")
    k = np.exp(-(d ** 2) / (2.0 * sigma ** 2))
    return KernelMatrix(values=k, sigma=float(sigma))


def _feature_distances(k_values: np.ndarray) -> np.ndarray:
    """Pairwise squared distances in the kernel feature space."""
    diag = np.diag(k_values)
    return np.maximum(diag[:, None] + diag[None, :] - 2.0 * k_values, 0.0)


def _cluster_point_distances(k_values, labels, k):
    """(n, k) squared feature distance from every node to every cluster mean;
    empty clusters get +inf columns."""
    n = k_values.shape[0]
    diag = np.diag(k_values)
    out = np.full((n, k), np.inf)
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        mean_sim = k_values[:, members].mean(axis=1)
        inner = k_values[np.ix_(members, members)].mean()
        out[:, c] = np.maximum(diag - 2.0 * mean_sim + inner, 0.0)
    return out


def _objective(k_values, labels, k) -> float:
    dist = _cluster_point_distances(k_values, labels, k)
    return float(dist[np.arange(len(labels)), labels].sum())


def _seed_plusplus(pair_dist, k, rng):
    """k-means++ style seeding on kernel-induced squared distances."""
    n = pair_dist.shape[0]
    seeds = [int(rng.integers(n))]
    while len(seeds) < k:
        closest = pair_dist[:, seeds].min(axis=1)
        total = closest.sum()
        if total <= 0.0:
            pick = next(i for i in range(n) if i not in seeds)
        else:
            pick = int(rng.choice(n, p=closest / total))
        seeds.append(pick)
    return seeds


def _repair_empty(labels, dist_own, k):
    """Move the globally farthest node (from a cluster of size >= 2) into
    each empty cluster."""
    repaired = False
    for c in range(k):
        if np.any(labels == c):
            continue
        sizes = np.bincount(labels, minlength=k)
        movable = np.flatnonzero(sizes[labels] >= 2)
        victim = movable[np.argmax(dist_own[movable])]
        labels[victim] = c
        repaired = True
    return repaired


def _single_move_descent(k_values, labels, k):
    """Greedy single-node moves until no move lowers the objective.

    Batch Lloyd stalls in local minima that one-node moves escape; this keeps
    the best-of-restarts result at the true optimum on desk-scale problems.
    Moves that would empty a cluster are skipped.
    """
    labels = labels.copy()
    obj = _objective(k_values, labels, k)
    improved = True
    while improved:
        improved = False
        for i in range(len(labels)):
            if np.sum(labels == labels[i]) < 2:
                continue
            for c in range(k):
                if c == labels[i]:
                    continue
                trial = labels.copy()
                trial[i] = c
                trial_obj = _objective(k_values, trial, k)
                if trial_obj < obj - 1e-12:
                    labels, obj = trial, trial_obj
                    improved = True
    return labels, obj


def _run_kmeans(k_values, k, seed, max_iter):
    n = k_values.shape[0]
    rng = np.random.default_rng(seed)
    pair_dist = _feature_distances(k_values)
    seeds = _seed_plusplus(pair_dist, k, rng)
    labels = np.argmin(pair_dist[:, seeds], axis=1)
    _repair_empty(labels, pair_dist[np.arange(n), np.take(seeds, labels)], k)
    prev_objective = np.inf
    for _ in range(max_iter):
        dist = _cluster_point_distances(k_values, labels, k)
        new_labels = np.argmin(dist, axis=1)
        repaired = _repair_empty(new_labels,
                                 dist[np.arange(n), new_labels], k)
        obj = _objective(k_values, new_labels, k)
        if not repaired:
            # Lloyd steps never increase the objective
            assert obj <= prev_objective + 1e-9, \
                f"objective rose {prev_objective} -> {obj}"
        prev_objective = obj
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return _single_move_descent(k_values, labels, k)


def kernel_kmeans(kernel, k: int, seed: int, restarts: int = RESTARTS,
                  max_iter: int = MAX_ITERATIONS):
    """Best-of-restarts kernel k-means; returns (labels, objective).

    Restart seeds are seed..seed+restarts-1; the winner is the lexicographic
    minimum of (objective, seed), so results are reproducible.
    """
    k_values = np.asarray(getattr(kernel, "values", kernel), dtype=float)
    n = k_values.shape[0]
    if k > n:
        raise KTooLarge(f"k={k} exceeds {n} nodes")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    best = None
    for s in range(seed, seed + restarts):
        labels, obj = _run_kmeans(k_values, k, s, max_iter)
        # strict < keeps the lowest seed on ties: (objective, seed) order
        if best is None or obj < best[0]:
            best = (obj, s, labels)
    return best[2], best[0]


def center_nodes(kernel, labels) -> np.ndarray:
    """Medoid per cluster: the member minimizing summed squared feature
    distance to its cluster; ties break to the lowest node index."""
    k_values = np.asarray(getattr(kernel, "values", kernel), dtype=float)
    labels = np.asarray(labels)
    pair_dist = _feature_distances(k_values)
    centers = []
    for c in range(labels.max() + 1):
        members = np.flatnonzero(labels == c)
        costs = pair_dist[np.ix_(members, members)].sum(axis=1)
        centers.append(int(members[np.argmin(costs)]))
    return np.array(centers, dtype=np.int64)


def outlier_scores(kernel, labels, centers) -> np.ndarray:
    """Kernel-induced feature distance from each node to its cluster center."""
    k_values = np.asarray(getattr(kernel, "values", kernel), dtype=float)
    labels = np.asarray(labels)
    centers = np.asarray(centers)
    diag = np.diag(k_values)
    c = centers[labels]
    gap = diag + diag[c] - 2.0 * k_values[np.arange(len(labels)), c]
    return np.sqrt(np.maximum(gap, 0.0))


def build_cluster_graph(distances, k: int, seed: int,
                        sigma=None) -> ClusterGraph:
    """Full graph: kernel -> k-means -> medoids -> scores; MDS coordinates
    are attached for display only."""
    d = np.asarray(getattr(distances, "values", distances), dtype=float)
    kernel = kernel_from_distances(d, sigma)
    labels, objective = kernel_kmeans(kernel, k, seed)
    centers = center_nodes(kernel, labels)
    scores = outlier_scores(kernel, labels, centers)
    return ClusterGraph(labels=labels, k=k, centers=centers,
                        embedding=mds_embed(d), distances=d,
                        objective=objective, outlier_scores=scores)


def graph_to_json(graph: ClusterGraph) -> dict:
    is_center = np.zeros(len(graph.labels), dtype=bool)
    is_center[graph.centers] = True
    nodes = [{
        "id": int(i),
        "xyz": [float(v) for v in graph.embedding.points[i]],
        "cluster": int(graph.labels[i]),
        "score": float(graph.outlier_scores[i]),
        "is_center": bool(is_center[i]),
    } for i in range(len(graph.labels))]
    return {"nodes": nodes, "k": graph.k,
            "objective": float(graph.objective)}
