"""Clustering of embedding vectors and graph communities.

k-means (k-means++ initialization, Lloyd iterations, multiple restarts)
is the primary clusterer; Davies-Bouldin, Dunn and silhouette indices
score candidate cluster counts; Louvain greedy modularity optimization
estimates a community count directly from the graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .util import derive_seed

__all__ = [
    "ClusterAssignment",
    "IndexScores",
    "kmeans",
    "validity_indices",
    "select_n",
    "louvain",
    "modularity",
]


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels with centroids and inertia.

    ``centroids`` is None when the clusterer saw only a distance matrix
    (no coordinates); ``inertia_history`` is the per-iteration inertia of
    the winning k-means run, empty for non-iterative methods.
    """

    labels: np.ndarray
    centroids: np.ndarray | None
    inertia: float
    n: int
    inertia_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n):
            raise ValueError("labels must lie in [0, n)")


@dataclass(frozen=True)
class IndexScores:
    davies_bouldin: float  # lower is better
    dunn: float  # higher is better
    silhouette: float  # in [-1, 1], higher is better


def _sq_distances(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(x**2, axis=1)[:, None]
        + np.sum(c**2, axis=1)[None, :]
        - 2.0 * (x @ c.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeans_pp_init(x: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    n_pts = x.shape[0]
    centroids = np.empty((n, x.shape[1]))
    first = int(rng.integers(n_pts))
    centroids[0] = x[first]
    d2 = _sq_distances(x, centroids[:1]).ravel()
    for k in range(1, n):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n_pts))
        else:
            idx = int(rng.choice(n_pts, p=d2 / total))
        centroids[k] = x[idx]
        d2 = np.minimum(d2, _sq_distances(x, centroids[k:k + 1]).ravel())
    return centroids


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float):
    history = []
    labels = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        d2 = _sq_distances(x, centroids)
        labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(x.shape[0]), labels].sum()))
        new_centroids = centroids.copy()
        for k in range(centroids.shape[0]):
            members = labels == k
            if np.any(members):
                new_centroids[k] = x[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its
                # assigned centroid (smallest index on ties)
                dist_to_own = d2[np.arange(x.shape[0]), labels]
                far = int(np.argmax(dist_to_own))
                new_centroids[k] = x[far]
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break
    # final consistent state: assign, recompute means, measure inertia
    d2 = _sq_distances(x, centroids)
    labels = np.argmin(d2, axis=1)
    for k in range(centroids.shape[0]):
        members = labels == k
        if np.any(members):
            centroids[k] = x[members].mean(axis=0)
    d2 = _sq_distances(x, centroids)
    inertia = float(d2[np.arange(x.shape[0]), labels].sum())
    history.append(inertia)
    return labels, centroids, inertia, history


def kmeans(
    x,
    n: int,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-9,
    restarts: int = 10,
) -> ClusterAssignment:
    """Best-of-``restarts`` k-means with k-means++ initialization.

    Lloyd iterations stop when the largest centroid shift falls under
    ``tol``.  A cluster emptied during iteration is re-seeded at the
    point farthest from its assigned centroid.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("input must be a 2-D matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    n_pts = x.shape[0]
    if not (2 <= n <= n_pts):
        raise ValueError(f"need 2 <= n <= {n_pts}, got n={n}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    best = None
    for r in range(restarts):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(derive_seed(seed, "kmeans", r))))
        init = _kmeans_pp_init(x, n, rng)
        labels, centroids, inertia, history = _lloyd(x, init, max_iter, tol)
        if best is None or inertia < best[2]:
            best = (labels, centroids, inertia, history)
    labels, centroids, inertia, history = best
    return ClusterAssignment(labels, centroids, inertia, n, tuple(history))


def _pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Exact row-difference distances (no a^2+b^2-2ab cancellation)."""
    n = x.shape[0]
    dist = np.empty((n, n))
    for i in range(n):
        dist[i] = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
        dist[i, i] = 0.0
    return dist


def validity_indices(x, labels) -> IndexScores:
    """Davies-Bouldin, Dunn and mean silhouette for a labeled partition.

    Euclidean distances throughout.  A singleton cluster contributes
    silhouette 0 for its point.  Raises if fewer than 2 clusters are
    nonempty or all points coincide (Dunn undefined).
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("one label per row required")
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise ValueError("need at least 2 nonempty clusters")
    x = x - x.mean(axis=0)  # distances are translation-invariant; centering conditions them
    dist = _pairwise_distances(x)
    members = [np.nonzero(labels == c)[0] for c in clusters]

    # Davies-Bouldin: mean over clusters of the worst (s_i + s_j) / d_ij
    centroids = np.array([x[m].mean(axis=0) for m in members])
    scatter = np.array(
        [np.linalg.norm(x[m] - centroids[i], axis=1).mean() for i, m in enumerate(members)]
    )
    centroid_dist = _pairwise_distances(centroids)
    k = clusters.size
    ratios = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            d = centroid_dist[i, j]
            ratios[i, j] = np.inf if d == 0.0 else (scatter[i] + scatter[j]) / d
    davies_bouldin = float(ratios.max(axis=1).mean())

    # Dunn: min inter-cluster point distance / max intra-cluster diameter
    diameters = [dist[np.ix_(m, m)].max() for m in members]
    max_diameter = max(diameters)
    if max_diameter == 0.0:
        raise ValueError("all intra-cluster distances are zero; Dunn index undefined")
    min_inter = min(
        dist[np.ix_(members[i], members[j])].min()
        for i in range(k)
        for j in range(i + 1, k)
    )
    dunn = float(min_inter / max_diameter)

    # silhouette: (b - a) / max(a, b) per point
    sil = np.zeros(x.shape[0])
    for pos, lab in enumerate(labels):
        own = members[int(np.searchsorted(clusters, lab))]
        if own.size == 1:
            sil[pos] = 0.0
            continue
        a = dist[pos, own].sum() / (own.size - 1)
        b = min(
            dist[pos, m].mean() for c, m in zip(clusters, members) if c != lab
        )
        top = max(a, b)
        sil[pos] = 0.0 if top == 0.0 else (b - a) / top
    return IndexScores(davies_bouldin, dunn, float(sil.mean()))


def select_n(
    x,
    n_range,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 100,
) -> tuple[int, dict[int, IndexScores]]:
    """Score each candidate cluster count and recommend one.

    The recommendation is a majority vote of the three indices' optima
    (Davies-Bouldin minimum, Dunn and silhouette maxima); ties break
    toward the smaller count.
    """
    x = np.asarray(x, dtype=float)
    candidates = sorted(set(int(n) for n in n_range))
    if not candidates:
        raise ValueError("empty candidate range")
    if candidates[0] < 2 or candidates[-1] > x.shape[0]:
        raise ValueError("candidate counts must lie in [2, N]")
    if np.allclose(x, x[0]):
        raise ValueError("degenerate input: all rows identical")
    table: dict[int, IndexScores] = {}
    for n in candidates:
        assignment = kmeans(x, n, seed=derive_seed(seed, "select", n), restarts=restarts, max_iter=max_iter)
        table[n] = validity_indices(x, assignment.labels)
    db_pick = min(candidates, key=lambda n: (table[n].davies_bouldin, n))
    dunn_pick = min(candidates, key=lambda n: (-table[n].dunn, n))
    sil_pick = min(candidates, key=lambda n: (-table[n].silhouette, n))
    votes = [db_pick, dunn_pick, sil_pick]
    counts = {n: votes.count(n) for n in set(votes)}
    top = max(counts.values())
    recommended = min(n for n, c in counts.items() if c == top)
    return recommended, table


# -- Louvain community detection ---------------------------------------------


def modularity(g, labels) -> float:
    """Weighted modularity Q = sum_c (e_c / m - (d_c / 2m)^2) of a labeling."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != g.num_nodes:
        raise ValueError("one label per node required")
    m = 0.0
    intra: dict[int, float] = {}
    degree: dict[int, float] = {}
    for i in range(g.num_nodes):
        strength = float(g.neighbor_weights(i).sum())
        degree[int(labels[i])] = degree.get(int(labels[i]), 0.0) + strength
    for u, v, w in g.edges():
        m += w
        cu, cv = int(labels[g.index(u)]), int(labels[g.index(v)])
        if cu == cv:
            intra[cu] = intra.get(cu, 0.0) + w
    if m <= 0.0:
        raise ValueError("modularity is undefined for an edgeless graph")
    return float(
        sum(
            intra.get(c, 0.0) / m - (degree.get(c, 0.0) / (2.0 * m)) ** 2
            for c in set(degree)
        )
    )


def _louvain_once(adj: list[dict[int, float]], self_loops: list[float],
                  m: float, rng: np.random.Generator) -> list[list[int]]:
    """One full Louvain run; returns communities as lists of original nodes."""
    n = len(adj)
    groups: list[list[int]] = [[i] for i in range(n)]  # original nodes per super-node
    min_gain = 1e-9 * m  # gains below are scaled by m relative to Q

    while True:
        size = len(adj)
        community = list(range(size))
        # strength = weighted degree incl. both self-loop endpoints
        strength = [sum(adj[i].values()) + 2.0 * self_loops[i] for i in range(size)]
        comm_total = strength[:]
        improved_any = False
        improved = True
        while improved:
            improved = False
            order = rng.permutation(size)
            for i in order:
                i = int(i)
                ci = community[i]
                # weight from i to each neighboring community
                link: dict[int, float] = {}
                for j, w in adj[i].items():
                    link[community[j]] = link.get(community[j], 0.0) + w
                comm_total[ci] -= strength[i]
                base = link.get(ci, 0.0) - comm_total[ci] * strength[i] / (2.0 * m)
                best_c, best_gain = ci, min_gain
                for c, w_ic in sorted(link.items()):
                    if c == ci:
                        continue
                    gain = w_ic - comm_total[c] * strength[i] / (2.0 * m) - base
                    if gain > best_gain:
                        best_gain = gain
                        best_c = c
                comm_total[best_c] += strength[i]
                community[i] = best_c
                if best_c != ci:
                    improved = True
                    improved_any = True
        if not improved_any:
            return groups
        # aggregate: communities become super-nodes
        remap: dict[int, int] = {}
        for c in community:
            if c not in remap:
                remap[c] = len(remap)
        new_size = len(remap)
        new_groups: list[list[int]] = [[] for _ in range(new_size)]
        for i, c in enumerate(community):
            new_groups[remap[c]].extend(groups[i])
        new_adj: list[dict[int, float]] = [dict() for _ in range(new_size)]
        new_loops = [0.0] * new_size
        for i in range(len(adj)):
            ci = remap[community[i]]
            new_loops[ci] += self_loops[i]
            for j, w in adj[i].items():
                if j < i:
                    continue
                cj = remap[community[j]]
                if ci == cj:
                    new_loops[ci] += w
                else:
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
                    new_adj[cj][ci] = new_adj[cj].get(ci, 0.0) + w
        adj = new_adj
        self_loops = new_loops
        groups = new_groups


def louvain(g, seed: int = 0, runs: int = 5) -> tuple[np.ndarray, int, float]:
    """Greedy modularity optimization (fast unfolding).

    Node sweeps use a seed-shuffled scan order; the best of ``runs``
    restarts by modularity is returned as (labels, community count, Q),
    with Q recomputed from scratch on the returned labels.
    """
    if g.num_edges == 0:
        raise ValueError("community detection needs at least one edge")
    n = g.num_nodes
    m = sum(w for _, _, w in g.edges())
    best_labels: np.ndarray | None = None
    best_q = -np.inf
    for r in range(runs):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(derive_seed(seed, "louvain", r))))
        adj = [dict(g.adjacency(i)) for i in range(n)]
        groups = _louvain_once(adj, [0.0] * n, m, rng)
        labels = np.zeros(n, dtype=np.int64)
        # canonical labels: communities numbered by their smallest node index
        for members in groups:
            members.sort()
        groups.sort(key=lambda ms: ms[0])
        for c, members in enumerate(groups):
            labels[members] = c
        q = modularity(g, labels)
        if q > best_q:
            best_q = q
            best_labels = labels
    count = int(best_labels.max()) + 1
    return best_labels, count, float(best_q)
