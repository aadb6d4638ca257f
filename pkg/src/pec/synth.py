"""Synthetic fixtures: metro-style networks with dual ground truths,
planted-partition interaction matrices, and Gaussian blob features.

The generators emit the same types the rest of the pipeline consumes, so
fixtures flow through graph construction, walks, training and evaluation
unchanged.  Everything is a pure function of (spec, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluator import GroundTruth
from .srg import FeatureMatrix, InteractionMatrix, SpaceRelationGraph
from .util import derive_seed

__all__ = [
    "MetroSpec",
    "metro_network",
    "default_metro_spec",
    "planted_od",
    "blobs",
]


@dataclass(frozen=True)
class MetroSpec:
    """A synthetic metro system: ``lines`` paths of ``stations_per_line``
    stations; each transfer entry identifies one station of one line with
    one station of another (they become a single node riding both lines).
    """

    lines: int
    stations_per_line: int
    transfers: tuple[tuple[int, int, int, int], ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lines < 2:
            raise ValueError("need at least 2 lines")
        if self.stations_per_line < 3:
            raise ValueError("need at least 3 stations per line")
        object.__setattr__(self, "transfers", tuple(tuple(t) for t in self.transfers))
        for la, pa, lb, pb in self.transfers:
            if not (0 <= la < self.lines and 0 <= lb < self.lines):
                raise ValueError(f"transfer references unknown line: {(la, pa, lb, pb)}")
            if not (0 <= pa < self.stations_per_line and 0 <= pb < self.stations_per_line):
                raise ValueError(f"transfer position out of range: {(la, pa, lb, pb)}")
            if la == lb:
                raise ValueError("a transfer must join two different lines")


def default_metro_spec(lines: int = 11, stations_per_line: int = 10, seed: int = 0) -> MetroSpec:
    """A connected metro analogue with a downtown interchange spine.

    Consecutive lines share one mid-line transfer station, placed so that
    successive interchange nodes are adjacent along the shared line (real
    systems concentrate transfers in a compact core).  The seed shifts the
    crossing column without changing the topology class.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(derive_seed(seed, "metro-spec"))))
    mid = stations_per_line // 2
    offset = int(rng.integers(-1, 2)) if stations_per_line >= 6 else 0
    col = min(max(mid + offset, 1), stations_per_line - 2)
    transfers = tuple((a, col, a + 1, col - 1) for a in range(lines - 1))
    return MetroSpec(lines, stations_per_line, transfers, seed)


def metro_network(spec: MetroSpec) -> tuple[SpaceRelationGraph, GroundTruth, GroundTruth]:
    """Build the metro graph and its two ground truths.

    Returns (graph, line-membership truth, transfer-vs-not truth).  A
    merged node's line label is the lowest line index it belongs to.
    """
    n_lines, n_stations = spec.lines, spec.stations_per_line
    # union-find over (line, position) slots
    parent = {(l, s): (l, s) for l in range(n_lines) for s in range(n_stations)}

    def find(slot):
        while parent[slot] != slot:
            parent[slot] = parent[parent[slot]]
            slot = parent[slot]
        return slot

    for la, pa, lb, pb in spec.transfers:
        ra, rb = find((la, pa)), find((lb, pb))
        if ra == rb:
            continue
        # lower (line, position) wins so merged ids and labels are stable
        if rb < ra:
            ra, rb = rb, ra
        parent[rb] = ra

    slots_by_root: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for l in range(n_lines):
        for s in range(n_stations):
            slots_by_root.setdefault(find((l, s)), []).append((l, s))

    def node_id(root: tuple[int, int]) -> str:
        return f"L{root[0]:02d}S{root[1]:02d}"

    node_order = sorted(slots_by_root)
    ids = [node_id(root) for root in node_order]
    line_labels = [min(l for l, _ in slots_by_root[root]) for root in node_order]
    transfer_labels = [
        1 if len({l for l, _ in slots_by_root[root]}) > 1 else 0 for root in node_order
    ]
    if sorted(set(line_labels)) != list(range(n_lines)):
        raise ValueError("transfer merging collapsed an entire line")

    edges = set()
    for l in range(n_lines):
        for s in range(n_stations - 1):
            a, b = find((l, s)), find((l, s + 1))
            if a == b:
                raise ValueError("transfer merging collapsed adjacent stations of one line")
            edges.add((node_id(a), node_id(b)) if a < b else (node_id(b), node_id(a)))
    g = SpaceRelationGraph(ids, [(u, v, 1.0) for u, v in sorted(edges)])
    line_truth = GroundTruth(tuple(ids), np.array(line_labels), n_lines, name="line-membership")
    transfer_truth = GroundTruth.from_labels(ids, transfer_labels, name="transfer-vs-not")
    return g, line_truth, transfer_truth


def planted_od(
    blocks: int,
    nodes_per_block: int,
    intra_rate: float,
    inter_rate: float,
    seed: int = 0,
) -> tuple[InteractionMatrix, GroundTruth]:
    """Poisson interaction volumes with planted block structure.

    Entry (i, j) ~ Poisson(intra_rate) when i and j share a block, else
    Poisson(inter_rate); diagonal zero.  Truth = block membership.
    """
    if blocks < 1 or nodes_per_block < 1:
        raise ValueError("need at least one block and one node per block")
    if not (intra_rate > inter_rate >= 0.0):
        raise ValueError("need intra_rate > inter_rate >= 0")
    n = blocks * nodes_per_block
    membership = np.repeat(np.arange(blocks), nodes_per_block)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    same = membership[:, None] == membership[None, :]
    rates = np.where(same, intra_rate, inter_rate)
    volumes = rng.poisson(rates).astype(float)
    np.fill_diagonal(volumes, 0.0)
    ids = [f"g{i:03d}" for i in range(n)]
    od = InteractionMatrix(ids, volumes)
    truth = GroundTruth(tuple(ids), membership, blocks, name="block-membership")
    return od, truth


def blobs(
    n_clusters: int,
    points_per_cluster: int,
    dims: int = 2,
    spread: float = 0.5,
    separation: float = 5.0,
    seed: int = 0,
) -> tuple[FeatureMatrix, GroundTruth]:
    """Gaussian blobs around centers at pairwise distance >= separation."""
    if n_clusters < 1 or points_per_cluster < 1 or dims < 1:
        raise ValueError("counts must be positive")
    if not (separation > 0.0):
        raise ValueError("separation must be positive")
    if spread < 0.0:
        raise ValueError("spread must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    centers: list[np.ndarray] = []
    radius = separation * max(1.0, n_clusters ** (1.0 / dims))
    while len(centers) < n_clusters:
        cand = rng.uniform(-radius, radius, size=dims)
        if all(np.linalg.norm(cand - c) >= separation for c in centers):
            centers.append(cand)
        else:
            radius *= 1.01  # widen the box until placement succeeds
    values = np.vstack(
        [c + rng.normal(0.0, spread, size=(points_per_cluster, dims)) for c in centers]
    )
    labels = np.repeat(np.arange(n_clusters), points_per_cluster)
    ids = [f"b{i:03d}" for i in range(values.shape[0])]
    features = FeatureMatrix(ids, values)
    truth = GroundTruth(tuple(ids), labels, n_clusters, name="blob-membership")
    return features, truth
