"""Comparison clusterers: spectral clustering and agglomerative HCA.

Spectral clustering embeds nodes with the eigenvectors of the smallest
eigenvalues of the symmetric normalized Laplacian and hands the rows to
k-means.  HCA merges observations bottom-up under single, average or
complete linkage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clusterer import ClusterAssignment, kmeans

__all__ = [
    "SpectralEmbedding",
    "normalized_laplacian",
    "spectral_embedding",
    "spectral_cluster",
    "hca",
    "agglomerate",
]


@dataclass(frozen=True)
class SpectralEmbedding:
    """Coordinates from the d smallest normalized-Laplacian eigenpairs."""

    vectors: np.ndarray
    eigenvalues: np.ndarray


def normalized_laplacian(g) -> np.ndarray:
    """Symmetric normalized Laplacian of the weight matrix.

    Zero-degree nodes get an all-zero row/column, so every isolated node
    contributes an eigenvalue 0 and the eigenvalue-0 multiplicity equals
    the number of connected components.
    """
    w = g.to_weight_matrix()
    deg = w.sum(axis=1)
    inv_sqrt = np.where(deg > 0.0, deg, 1.0) ** -0.5
    inv_sqrt[deg == 0.0] = 0.0
    lap = -(inv_sqrt[:, None] * w * inv_sqrt[None, :])
    lap[np.diag_indices_from(lap)] += (deg > 0.0).astype(float)
    return lap


def spectral_embedding(g, d: int) -> SpectralEmbedding:
    """Eigenvectors of the d smallest eigenvalues of the normalized Laplacian."""
    n = g.num_nodes
    if g.num_edges == 0:
        raise ValueError("spectral embedding needs at least one edge")
    if not (1 <= d <= n):
        raise ValueError(f"need 1 <= d <= {n}, got d={d}")
    lap = normalized_laplacian(g)
    eigenvalues, eigenvectors = np.linalg.eigh(lap)
    eigenvalues = eigenvalues[:d]
    if eigenvalues.min() < -1e-9 or eigenvalues.max() > 2.0 + 1e-9:
        raise AssertionError("normalized-Laplacian eigenvalues escaped [0, 2]")
    return SpectralEmbedding(
        vectors=eigenvectors[:, :d].copy(),
        eigenvalues=np.clip(eigenvalues, 0.0, 2.0),
    )


def spectral_cluster(g, d: int, n: int, seed: int = 0, restarts: int = 10) -> ClusterAssignment:
    """k-means on row-normalized spectral coordinates.

    Rows of isolated nodes can be identically zero; they are left at the
    origin and end up sharing whatever cluster claims it.
    """
    emb = spectral_embedding(g, d)
    norms = np.linalg.norm(emb.vectors, axis=1)
    rows = emb.vectors / np.where(norms > 0.0, norms, 1.0)[:, None]
    return kmeans(rows, n, seed=seed, restarts=restarts)


# -- agglomerative hierarchical clustering ------------------------------------

_LINKAGES = ("single", "average", "complete")


def agglomerate(distances: np.ndarray, linkage: str) -> list[tuple[int, int, float]]:
    """Full merge history [(cluster_a, cluster_b, distance), ...].

    Input clusters are numbered 0..N-1; merge t creates cluster N+t (as in
    the usual linkage-matrix convention).  Ties break toward the smallest
    (a, b) pair.
    """
    if linkage not in _LINKAGES:
        raise ValueError(f"linkage must be one of {_LINKAGES}")
    dist = np.asarray(distances, dtype=float)
    n = dist.shape[0]
    if dist.shape != (n, n) or not np.allclose(dist, dist.T):
        raise ValueError("need a square symmetric distance matrix")
    active: dict[int, int] = {i: 1 for i in range(n)}  # cluster id -> size
    cur = {i: dist[i].copy() for i in range(n)}
    pair_dist: dict[tuple[int, int], float] = {
        (i, j): float(dist[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    merges: list[tuple[int, int, float]] = []
    next_id = n
    while len(active) > 1:
        (a, b), d_ab = min(pair_dist.items(), key=lambda kv: (kv[1], kv[0]))
        merges.append((a, b, d_ab))
        size_a, size_b = active.pop(a), active.pop(b)
        del pair_dist[(a, b)]
        new_dists: dict[int, float] = {}
        for c in active:
            key_ac = (a, c) if a < c else (c, a)
            key_bc = (b, c) if b < c else (c, b)
            d_ac = pair_dist.pop(key_ac)
            d_bc = pair_dist.pop(key_bc)
            if linkage == "single":
                new_dists[c] = min(d_ac, d_bc)
            elif linkage == "complete":
                new_dists[c] = max(d_ac, d_bc)
            else:
                new_dists[c] = (size_a * d_ac + size_b * d_bc) / (size_a + size_b)
        for c, d_new in new_dists.items():
            pair_dist[(c, next_id)] = d_new
        active[next_id] = size_a + size_b
        next_id += 1
    return merges


def hca(
    x=None,
    distances=None,
    linkage: str = "average",
    n: int = 2,
) -> ClusterAssignment:
    """Agglomerative clustering cut at ``n`` clusters.

    Give either coordinates ``x`` (Euclidean distances, centroids and
    inertia computed) or a precomputed ``distances`` matrix (no centroids).
    """
    if (x is None) == (distances is None):
        raise ValueError("give exactly one of x or distances")
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise ValueError("x must be a 2-D matrix")
        sq = np.sum(x**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        np.maximum(d2, 0.0, out=d2)
        dist = np.sqrt(d2)
        n_pts = x.shape[0]
    else:
        dist = np.asarray(distances, dtype=float)
        n_pts = dist.shape[0]
    if not (1 <= n <= n_pts):
        raise ValueError(f"need 1 <= n <= {n_pts}, got n={n}")

    merges = agglomerate(dist, linkage)[: n_pts - n]
    members: dict[int, list[int]] = {i: [i] for i in range(n_pts)}
    next_id = n_pts
    for a, b, _ in merges:
        members[next_id] = members.pop(a) + members.pop(b)
        next_id += 1
    # label clusters by their smallest member index
    clusters = sorted(members.values(), key=min)
    labels = np.zeros(n_pts, dtype=np.int64)
    for c, rows in enumerate(clusters):
        labels[rows] = c
    if x is not None:
        centroids = np.array([x[rows].mean(axis=0) for rows in clusters])
        inertia = float(sum(((x[rows] - centroids[c]) ** 2).sum() for c, rows in enumerate(clusters)))
        return ClusterAssignment(labels, centroids, inertia, n)
    return ClusterAssignment(labels, None, 0.0, n)
