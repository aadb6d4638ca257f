"""Space relation graphs: undirected weighted graphs over spatial units.

A space relation graph (SRG) relates the units (parcels, grid cells,
stations) of a study area.  Edge weights come either from the similarity
of per-unit feature vectors (SRG-I) or from normalized pairwise
interaction volumes such as an origin-destination matrix (SRG-II).
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FeatureMatrix",
    "InteractionMatrix",
    "SpaceRelationGraph",
    "build_srg_from_features",
    "build_srg_from_interactions",
    "build_srg_from_adjacency",
    "save_graph",
    "load_graph",
    "save_feature_csv",
    "load_feature_csv",
    "save_od_csv",
    "load_od_csv",
]


def _check_node_ids(node_ids) -> tuple[str, ...]:
    ids = tuple(str(x) for x in node_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("node identifiers must be unique")
    for nid in ids:
        if not nid or any(c.isspace() for c in nid) or "," in nid:
            raise ValueError(
                f"invalid node identifier {nid!r}: must be non-empty, "
                "without whitespace or commas"
            )
    return ids


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-node feature vectors (one row per node)."""

    node_ids: tuple[str, ...]
    values: np.ndarray

    def __init__(self, node_ids: Sequence[str], values) -> None:
        ids = _check_node_ids(node_ids)
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("feature values must be a 2-D matrix")
        if len(ids) != vals.shape[0]:
            raise ValueError("one row of features per node required")
        if len(ids) < 2:
            raise ValueError("need at least 2 nodes")
        if vals.shape[1] < 1:
            raise ValueError("need at least 1 feature column")
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class InteractionMatrix:
    """Pairwise interaction volumes; entry (i, j) is volume from i to j.

    The diagonal is ignored by every consumer (self-interaction carries no
    relational information).
    """

    node_ids: tuple[str, ...]
    volumes: np.ndarray

    def __init__(self, node_ids: Sequence[str], volumes) -> None:
        ids = _check_node_ids(node_ids)
        vols = np.asarray(volumes, dtype=float)
        if vols.ndim != 2 or vols.shape[0] != vols.shape[1]:
            raise ValueError("interaction volumes must be a square matrix")
        if vols.shape[0] != len(ids):
            raise ValueError("matrix order must match the number of node ids")
        if not np.all(np.isfinite(vols)):
            raise ValueError("interaction volumes must be finite")
        if np.any(vols < 0):
            raise ValueError("interaction volumes must be nonnegative")
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "volumes", vols)


class SpaceRelationGraph:
    """Undirected, positively weighted graph with string node identifiers.

    Each unordered pair is stored once; self-loops are rejected.  Instances
    are immutable after construction and safe to share between workers.
    """

    def __init__(self, node_ids: Sequence[str], edges: Iterable[tuple[str, str, float]]):
        self.node_ids = _check_node_ids(node_ids)
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        n = len(self.node_ids)
        adj: list[dict[int, float]] = [dict() for _ in range(n)]
        for u, v, w in edges:
            try:
                ui, vi = self._index[u], self._index[v]
            except KeyError as exc:
                raise ValueError(f"edge references unknown node {exc.args[0]!r}") from None
            if ui == vi:
                raise ValueError(f"self-loop on node {u!r} is not allowed")
            w = float(w)
            if not np.isfinite(w) or w <= 0.0:
                raise ValueError(f"edge ({u!r}, {v!r}) has nonpositive or nonfinite weight {w}")
            if vi in adj[ui]:
                raise ValueError(f"duplicate edge ({u!r}, {v!r})")
            adj[ui][vi] = w
            adj[vi][ui] = w
        self._adj = tuple(adj)
        self._nbr_idx = tuple(
            np.array(sorted(adj[i]), dtype=np.int64) for i in range(n)
        )
        self._nbr_wts = tuple(
            np.array([adj[i][j] for j in sorted(adj[i])], dtype=float) for i in range(n)
        )

    # -- basic accessors ---------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    def degree(self, node_id: str) -> int:
        return len(self._adj[self._index[node_id]])

    def has_edge(self, u: str, v: str) -> bool:
        return self._index[v] in self._adj[self._index[u]]

    def weight(self, u: str, v: str) -> float:
        return self._adj[self._index[u]][self._index[v]]

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        i = self._index[node_id]
        return tuple(self.node_ids[j] for j in self._nbr_idx[i])

    def neighbor_indices(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of node index ``i`` (do not mutate)."""
        return self._nbr_idx[i]

    def neighbor_weights(self, i: int) -> np.ndarray:
        return self._nbr_wts[i]

    def adjacency(self, i: int) -> dict[int, float]:
        """Neighbor-index -> weight mapping for node index ``i`` (do not mutate)."""
        return self._adj[i]

    def edges(self) -> list[tuple[str, str, float]]:
        """Canonical edge list: by node index, each pair once."""
        out = []
        for i in range(self.num_nodes):
            for j in self._nbr_idx[i]:
                if i < j:
                    out.append((self.node_ids[i], self.node_ids[int(j)], self._adj[i][int(j)]))
        return out

    def isolated_nodes(self) -> tuple[str, ...]:
        return tuple(nid for i, nid in enumerate(self.node_ids) if not self._adj[i])

    def to_weight_matrix(self) -> np.ndarray:
        """Dense symmetric weight matrix in node order (zero diagonal)."""
        n = self.num_nodes
        mat = np.zeros((n, n))
        for i in range(n):
            mat[i, self._nbr_idx[i]] = self._nbr_wts[i]
        return mat

    def fingerprint(self) -> str:
        """Content hash over nodes and the canonical edge list."""
        h = hashlib.sha256()
        for nid in self.node_ids:
            h.update(nid.encode("utf-8"))
            h.update(b"\x00")
        h.update(b"\x01")
        for u, v, w in self.edges():
            h.update(f"{u}\t{v}\t{w!r}\n".encode("utf-8"))
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpaceRelationGraph):
            return NotImplemented
        return self.node_ids == other.node_ids and self._adj == other._adj

    def __repr__(self) -> str:
        return (
            f"SpaceRelationGraph({self.num_nodes} nodes, {self.num_edges} edges, "
            f"{len(self.isolated_nodes())} isolated)"
        )


# -- builders ---------------------------------------------------------------


def _gaussian_similarity(values: np.ndarray, sigma: float) -> np.ndarray:
    sq = np.sum(values**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (values @ values.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * sigma**2))

def _cosine_similarity(values: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(values, axis=1)
    if np.any(norms == 0.0):
        bad = np.nonzero(norms == 0.0)[0][0]
        raise ValueError(
            f"all-zero feature row (node index {bad}) has no direction for cosine similarity"
        )
    unit = values / norms[:, None]
    sim = unit @ unit.T
    np.clip(sim, 0.0, 1.0, out=sim)
    return sim


def build_srg_from_features(
    features: FeatureMatrix,
    similarity: str = "gaussian",
    sigma: float = 1.0,
    sparsify: str = "none",
    k_nn: int | None = None,
    tau: float | None = None,
) -> SpaceRelationGraph:
    """Build an SRG-I: edge weights are pairwise feature similarities.

    similarity: "gaussian" (exp(-||x-y||^2 / 2 sigma^2)) or "cosine"
    (negative cosine values are clamped to zero: anti-correlated rows are
    treated as unrelated).  Euclidean distance enters only through the
    Gaussian kernel, which maps it into the required (0, 1] weight range.
    Zero-similarity pairs produce no edge.

    sparsify: "none" keeps the full similarity graph; "knn" keeps the union
    of every node's ``k_nn`` strongest edges (symmetric by construction);
    "threshold" keeps edges with weight >= ``tau``.
    """
    n = len(features.node_ids)
    if similarity == "gaussian":
        if not (sigma > 0.0):
            raise ValueError("gaussian similarity requires sigma > 0")
        sim = _gaussian_similarity(features.values, float(sigma))
    elif similarity == "cosine":
        sim = _cosine_similarity(features.values)
    else:
        raise ValueError(f"unknown similarity {similarity!r}")
    np.fill_diagonal(sim, 0.0)

    keep = sim > 0.0
    if sparsify == "none":
        pass
    elif sparsify == "knn":
        if k_nn is None or not (1 <= int(k_nn) < n):
            raise ValueError("knn sparsification requires 1 <= k_nn < N")
        k = int(k_nn)
        sel = np.zeros_like(keep)
        for i in range(n):
            # strongest first; ties resolved toward the smaller neighbor index
            order = np.lexsort((np.arange(n), -sim[i]))
            picked = [j for j in order if keep[i, j]][:k]
            sel[i, picked] = True
        keep &= sel | sel.T
    elif sparsify == "threshold":
        if tau is None or not (0.0 <= float(tau) <= 1.0):
            raise ValueError("threshold sparsification requires tau in [0, 1]")
        keep &= sim >= float(tau)
    else:
        raise ValueError(f"unknown sparsify mode {sparsify!r}")

    ids = features.node_ids
    iu, ju = np.nonzero(np.triu(keep, k=1))
    edge_list = [(ids[i], ids[j], float(sim[i, j])) for i, j in zip(iu, ju)]
    return SpaceRelationGraph(ids, edge_list)


def build_srg_from_interactions(od: InteractionMatrix) -> SpaceRelationGraph:
    """Build an SRG-II from an interaction / OD matrix.

    Directed volumes are folded to undirected by the arithmetic mean
    (A + A^T) / 2, then normalized by the global maximum so the strongest
    pair has weight 1.  Zero pairs produce no edge.
    """
    sym = (od.volumes + od.volumes.T) / 2.0
    np.fill_diagonal(sym, 0.0)
    top = sym.max()
    if top <= 0.0:
        raise ValueError("interaction matrix has no off-diagonal volume")
    weights = sym / top
    ids = od.node_ids
    iu, ju = np.nonzero(np.triu(weights, k=1))
    edge_list = [(ids[i], ids[j], float(weights[i, j])) for i, j in zip(iu, ju)]
    return SpaceRelationGraph(ids, edge_list)


def build_srg_from_adjacency(
    edges: Iterable[tuple[str, str]],
    node_ids: Sequence[str] | None = None,
) -> SpaceRelationGraph:
    """Build a unit-weight SRG from a plain adjacency list.

    Duplicate pairs (in either orientation) collapse to one edge.  When
    ``node_ids`` is omitted, nodes are taken in order of first appearance.
    """
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    appearance: list[str] = []
    appeared: set[str] = set()
    for u, v in edges:
        u, v = str(u), str(v)
        if u == v:
            raise ValueError(f"self-loop ({u!r}, {v!r}) is not allowed")
        for x in (u, v):
            if x not in appeared:
                appeared.add(x)
                appearance.append(x)
        key = (u, v) if u <= v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        pairs.append(key)
    ids = tuple(node_ids) if node_ids is not None else tuple(appearance)
    return SpaceRelationGraph(ids, [(u, v, 1.0) for u, v in pairs])


# -- file formats -------------------------------------------------------------


def save_graph(g: SpaceRelationGraph, path) -> None:
    """Write the TSV edge list: ``u<TAB>v<TAB>weight``, one undirected edge
    per line.  ``#node`` directives preserve node order and isolated nodes.
    """
    lines = [f"#node\t{nid}" for nid in g.node_ids]
    lines += [f"{u}\t{v}\t{w!r}" for u, v, w in g.edges()]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph(path) -> SpaceRelationGraph:
    """Read a TSV edge list written by :func:`save_graph` (or any file of
    ``u<TAB>v<TAB>weight`` lines; ``#`` lines other than ``#node`` are
    comments)."""
    declared: list[str] = []
    raw_edges: list[tuple[str, str, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                if line.startswith("#node\t"):
                    declared.append(line.split("\t", 1)[1])
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 tab-separated fields")
            u, v, wtext = parts
            try:
                w = float(wtext)
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad weight {wtext!r}") from None
            if not np.isfinite(w) or w <= 0.0:
                raise ValueError(f"{path}: line {lineno}: weight must be positive, got {wtext}")
            if u == v:
                raise ValueError(f"{path}: line {lineno}: self-loop on {u!r}")
            raw_edges.append((u, v, w))
    if declared:
        ids: Sequence[str] = declared
    else:
        order: list[str] = []
        seen: set[str] = set()
        for u, v, _ in raw_edges:
            for x in (u, v):
                if x not in seen:
                    seen.add(x)
                    order.append(x)
        ids = order
    try:
        return SpaceRelationGraph(ids, raw_edges)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_feature_csv(features: FeatureMatrix, path) -> None:
    n_feat = features.values.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node"] + [f"f{i + 1}" for i in range(n_feat)])
        for nid, row in zip(features.node_ids, features.values):
            writer.writerow([nid] + [repr(float(x)) for x in row])


def load_feature_csv(path) -> FeatureMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2 or rows[0][0] != "node":
        raise ValueError(f"{path}: expected header 'node,<f1>,...'")
    width = len(rows[0])
    ids, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise ValueError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
        ids.append(row[0])
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric feature value") from None
    return FeatureMatrix(ids, np.array(values))


def save_od_csv(od: InteractionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["od"] + list(od.node_ids))
        for nid, row in zip(od.node_ids, od.volumes):
            writer.writerow([nid] + [repr(float(x)) for x in row])


def load_od_csv(path) -> InteractionMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise ValueError(f"{path}: expected a header row with node identifiers")
    col_ids = rows[0][1:]
    ids, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(col_ids) + 1:
            raise ValueError(f"{path}: line {lineno}: row width does not match header")
        ids.append(row[0])
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric volume") from None
    if ids != col_ids:
        raise ValueError(f"{path}: row identifiers do not match header identifiers")
    return InteractionMatrix(ids, np.array(values))
