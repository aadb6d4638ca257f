"""Scoring and experiment harnesses.

Macro-F1 against a ground truth (cluster labels are matched to classes by
an optimal one-to-one assignment first), hyperparameter sweep grids with
baseline columns, additive-noise robustness curves, and region-to-region
interaction frequency tables.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .baselines import hca, spectral_cluster
from .clusterer import kmeans
from .embedder import TrainConfig, train
from .srg import InteractionMatrix, build_srg_from_interactions
from .util import derive_seed
from .walker import WalkConfig, build_alias_tables, generate_walks

__all__ = [
    "GroundTruth",
    "EvaluationReport",
    "NoiseSpec",
    "macro_f1",
    "run_embedding_clustering",
    "DEFAULT_PARAMS",
    "sweep",
    "SweepReport",
    "perturb",
    "noise_robustness",
    "NoiseReport",
    "interaction_frequency_report",
    "FrequencyReport",
    "save_labels",
    "load_labels",
    "load_ground_truth",
]


@dataclass(frozen=True)
class GroundTruth:
    """Reference labels for every node; labels are contiguous from 0."""

    node_ids: tuple[str, ...]
    labels: np.ndarray
    n_true: int
    name: str = "truth"

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        if labels.shape[0] != len(self.node_ids):
            raise ValueError("one label per node required")
        present = np.unique(labels)
        if not np.array_equal(present, np.arange(self.n_true)):
            raise ValueError("labels must be contiguous integers 0..n_true-1, all present")

    @classmethod
    def from_labels(cls, node_ids, labels, name: str = "truth") -> "GroundTruth":
        """Remap arbitrary label values to contiguous 0..k-1 (sorted order)."""
        raw = np.asarray(labels)
        values = sorted(set(raw.tolist()))
        remap = {v: i for i, v in enumerate(values)}
        return cls(
            node_ids=tuple(node_ids),
            labels=np.array([remap[v] for v in raw.tolist()], dtype=np.int64),
            n_true=len(values),
            name=name,
        )


@dataclass(frozen=True)
class EvaluationReport:
    macro_f1: float
    per_class_f1: tuple[float, ...]
    matching: dict
    repeats: int = 1
    config: dict = field(default_factory=dict)


def macro_f1(pred_labels, truth: GroundTruth, node_ids=None) -> EvaluationReport:
    """Macro-averaged F1 after optimal cluster-to-class matching.

    Predicted labels are arbitrary cluster names; the one-to-one matching
    maximizing summed per-class F1 is found by an assignment solve (dummy
    rows/columns pad unequal counts).  The score is the unweighted mean of
    per-class F1 over the truth classes.
    """
    pred = np.asarray(pred_labels)
    if node_ids is not None:
        ids = [str(x) for x in node_ids]
        if sorted(ids) != sorted(truth.node_ids):
            raise ValueError("predicted node set does not match the ground truth")
        pos = {nid: i for i, nid in enumerate(ids)}
        pred = pred[[pos[nid] for nid in truth.node_ids]]
    if pred.shape[0] != len(truth.node_ids):
        raise ValueError("one predicted label per node required")

    pred_values = sorted(set(pred.tolist()))
    n_pred = len(pred_values)
    n_true = truth.n_true
    size = max(n_pred, n_true)
    pred_index = {v: i for i, v in enumerate(pred_values)}
    counts = np.zeros((size, size))
    for p, t in zip(pred.tolist(), truth.labels.tolist()):
        counts[pred_index[p], t] += 1
    pred_sizes = counts.sum(axis=1)
    true_sizes = counts.sum(axis=0)
    denom = pred_sizes[:, None] + true_sizes[None, :]
    with np.errstate(invalid="ignore"):
        f1 = np.where(denom > 0, 2.0 * counts / np.where(denom > 0, denom, 1.0), 0.0)
    rows, cols = linear_sum_assignment(f1, maximize=True)
    per_class = np.zeros(n_true)
    matching = {}
    for r, c in zip(rows, cols):
        if c < n_true:
            per_class[c] = f1[r, c]
        if r < n_pred and c < n_true:
            matching[pred_values[r]] = int(c)
    return EvaluationReport(
        macro_f1=float(per_class.mean()),
        per_class_f1=tuple(float(v) for v in per_class),
        matching=matching,
    )


# -- the embedding-and-clustering pipeline used by experiments ----------------

DEFAULT_PARAMS = {
    "p": 1.0,
    "q": 1.0,
    "walk_length": 10,
    "num_walks": 10,
    "dim": 5,
    "window": 5,
    "epochs": 5,
    "initial_lr": 0.025,
    "negatives": 5,
    "batch_size": 64,
    "restarts": 10,
}


def run_embedding_clustering(g, n: int, params: dict | None = None, seed: int = 0,
                             sampler=None):
    """Walks -> skip-gram training -> k-means; returns (labels, embedding).

    Labels are aligned to ``g.node_ids``.  All stage seeds derive from
    ``seed``, so a run is fully reproducible.
    """
    par = dict(DEFAULT_PARAMS)
    par.update(params or {})
    wcfg = WalkConfig(
        p=float(par["p"]),
        q=float(par["q"]),
        walk_length=int(par["walk_length"]),
        num_walks=int(par["num_walks"]),
        seed=derive_seed(seed, "walks"),
    )
    corpus = generate_walks(g, wcfg, sampler=sampler)
    tcfg = TrainConfig(
        dim=int(par["dim"]),
        window=int(par["window"]),
        epochs=int(par["epochs"]),
        initial_lr=float(par["initial_lr"]),
        negatives=int(par["negatives"]),
        batch_size=int(par["batch_size"]),
        seed=derive_seed(seed, "train"),
    )
    emb = train(corpus, tcfg)
    assignment = kmeans(
        emb.vectors, n, seed=derive_seed(seed, "kmeans"), restarts=int(par["restarts"])
    )
    return assignment.labels, emb


# -- hyperparameter sweep ------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    params: dict
    scores: dict  # truth name -> {"mean": float, "std": float}
    baselines: dict  # truth name -> {"sc": float, "hca": float}
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    param_names: tuple[str, ...]
    cells: tuple[SweepCell, ...]
    repeats: int
    truth_names: tuple[str, ...]

    def best_cell(self, truth_name: str) -> dict:
        """Grid point with the highest mean Macro-F1 for one ground truth."""
        scored = [c for c in self.cells if c.error is None and truth_name in c.scores]
        if not scored:
            raise ValueError(f"no successful cells for truth {truth_name!r}")
        best = max(scored, key=lambda c: c.scores[truth_name]["mean"])
        return dict(best.params)

    def to_json(self) -> dict:
        tables = {}
        for truth in self.truth_names:
            rows = []
            for cell in self.cells:
                row = {"params": dict(cell.params), "error": cell.error}
                if cell.error is None:
                    row.update(cell.scores.get(truth, {}))
                    row.update(
                        {f"{k}_macro_f1": v for k, v in cell.baselines.get(truth, {}).items()}
                    )
                rows.append(row)
            tables[truth] = rows
        return {
            "param_names": list(self.param_names),
            "repeats": self.repeats,
            "tables": tables,
        }

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                list(self.param_names)
                + ["truth", "method", "macro_f1_mean", "macro_f1_std", "repeats", "error"]
            )
            for cell in self.cells:
                base = [repr(cell.params[k]) for k in self.param_names]
                for truth in self.truth_names:
                    if cell.error is not None:
                        writer.writerow(base + [truth, "pem", "", "", self.repeats, cell.error])
                        continue
                    score = cell.scores[truth]
                    writer.writerow(
                        base
                        + [truth, "pem", repr(score["mean"]), repr(score["std"]), self.repeats, ""]
                    )
                    for method, value in sorted(cell.baselines.get(truth, {}).items()):
                        writer.writerow(base + [truth, method, repr(value), "", self.repeats, ""])


def sweep(
    g,
    truths,
    grid: dict,
    base_params: dict | None = None,
    repeats: int = 20,
    seed: int = 0,
    include_baselines: bool = False,
    workers: int = 1,
) -> SweepReport:
    """Mean Macro-F1 over ``repeats`` seeded runs for every grid cell.

    ``grid`` maps parameter names (p, q, dim, walk_length, num_walks,
    window, ...) to candidate values; cells are their cartesian product
    applied over ``base_params``.  With ``include_baselines``, spectral
    clustering and average-linkage HCA are scored per cell at the same
    embedding dimension.  A failing cell is recorded and skipped.
    """
    truths = list(truths)
    names = [t.name for t in truths]
    if len(set(names)) != len(names):
        raise ValueError("ground truths must have distinct names")
    param_names = tuple(grid.keys())
    if not param_names:
        return SweepReport((), (), repeats, tuple(names))
    cells_values = list(itertools.product(*[list(grid[k]) for k in param_names]))
    cells: list[SweepCell] = []
    baseline_cache: dict[tuple, dict] = {}

    for cell_idx, values in enumerate(cells_values):
        par = dict(base_params or {})
        par.update(dict(zip(param_names, values)))
        full = dict(DEFAULT_PARAMS)
        full.update(par)
        try:
            sampler = build_alias_tables(g, float(full["p"]), float(full["q"]))

            def one_run(rep: int) -> list[float]:
                run_seed = derive_seed(seed, "cell", cell_idx, rep)
                out = []
                for truth in truths:
                    labels, _ = run_embedding_clustering(
                        g,
                        truth.n_true,
                        params=full,
                        seed=derive_seed(run_seed, truth.name),
                        sampler=sampler,
                    )
                    out.append(macro_f1(labels, truth, node_ids=g.node_ids).macro_f1)
                return out

            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    per_rep = list(pool.map(one_run, range(repeats)))
            else:
                per_rep = [one_run(r) for r in range(repeats)]
            arr = np.array(per_rep)  # (repeats, n_truths)
            scores = {
                t.name: {"mean": float(arr[:, i].mean()), "std": float(arr[:, i].std())}
                for i, t in enumerate(truths)
            }
            baselines: dict[str, dict] = {}
            if include_baselines:
                key = (int(full["dim"]),)
                if key not in baseline_cache:
                    baseline_cache[key] = _baseline_scores(
                        g, truths, int(full["dim"]), repeats, seed
                    )
                baselines = baseline_cache[key]
            cells.append(SweepCell(dict(zip(param_names, values)), scores, baselines))
        except Exception as exc:  # record the failure, keep sweeping
            cells.append(
                SweepCell(dict(zip(param_names, values)), {}, {}, error=f"{type(exc).__name__}: {exc}")
            )
    return SweepReport(param_names, tuple(cells), repeats, tuple(names))


def _baseline_scores(g, truths, dim: int, repeats: int, seed: int) -> dict:
    """Spectral-clustering and HCA Macro-F1, per ground truth."""
    out: dict[str, dict] = {}
    weight_rows = g.to_weight_matrix()
    dim = min(dim, g.num_nodes)
    for truth in truths:
        sc_scores = []
        for rep in range(repeats):
            sc = spectral_cluster(g, dim, truth.n_true, seed=derive_seed(seed, "sc", truth.name, rep))
            sc_scores.append(macro_f1(sc.labels, truth, node_ids=g.node_ids).macro_f1)
        agg = hca(x=weight_rows, linkage="average", n=truth.n_true)
        out[truth.name] = {
            "sc": float(np.mean(sc_scores)),
            "hca": macro_f1(agg.labels, truth, node_ids=g.node_ids).macro_f1,
        }
    return out


# -- additive noise ------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise description: Gaussian (level = sigma) or Poisson
    (level = lambda), with its own seed."""

    kind: str
    level: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "poisson"):
            raise ValueError("kind must be 'gaussian' or 'poisson'")
        if not (self.level >= 0.0):
            raise ValueError("noise level must be nonnegative")

    @property
    def label(self) -> str:
        return f"{self.kind}({self.level:g})"


def perturb(matrix, spec: NoiseSpec, mode: str = "scale-noise") -> np.ndarray:
    """Add a seeded noise matrix, processed into [0, 1].

    mode "scale-noise" (default): the noise matrix itself is min-max
    scaled into [0, 1] before addition.  mode "clip-result": raw noise is
    added and the *result* is clipped into [0, 1].  Entries that end up
    at or below zero drop the corresponding edge when a graph is rebuilt.
    """
    mat = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(mat)):
        raise ValueError("input matrix must be finite")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    if spec.kind == "gaussian":
        noise = rng.normal(0.0, spec.level, size=mat.shape) if spec.level > 0 else np.zeros(mat.shape)
    else:
        noise = rng.poisson(spec.level, size=mat.shape).astype(float)
    if mode == "scale-noise":
        lo, hi = noise.min(), noise.max()
        scaled = (noise - lo) / (hi - lo) if hi > lo else np.zeros(mat.shape)
        return mat + scaled
    if mode == "clip-result":
        return np.clip(mat + noise, 0.0, 1.0)
    raise ValueError("mode must be 'scale-noise' or 'clip-result'")


@dataclass(frozen=True)
class NoiseReport:
    truth_name: str
    baseline_mean: float
    curves: dict  # noise label -> {"mean": float, "std": float, "level": float, "kind": str}
    repeats: int
    mode: str

    def to_json(self) -> dict:
        return {
            "truth": self.truth_name,
            "repeats": self.repeats,
            "mode": self.mode,
            "unperturbed_macro_f1": self.baseline_mean,
            "curves": self.curves,
        }

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kind", "level", "macro_f1_mean", "macro_f1_std", "repeats"])
            writer.writerow(["none", "0", repr(self.baseline_mean), "", self.repeats])
            for label in sorted(self.curves):
                cur = self.curves[label]
                writer.writerow(
                    [cur["kind"], repr(cur["level"]), repr(cur["mean"]), repr(cur["std"]), self.repeats]
                )


def noise_robustness(
    g,
    truth: GroundTruth,
    noise: list[tuple[str, float]],
    params: dict | None = None,
    repeats: int = 20,
    seed: int = 0,
    mode: str = "scale-noise",
    workers: int = 1,
) -> NoiseReport:
    """Macro-F1 of the full pipeline on noise-perturbed weight matrices.

    For every (kind, level) in ``noise``, each repeat draws a fresh noise
    matrix, adds it to the graph's weight matrix (per :func:`perturb`),
    rebuilds the graph from the noisy volumes and runs the embedding
    pipeline.  The unperturbed pipeline is run with the same repeat seeds
    as the reference.
    """
    weight = g.to_weight_matrix()
    node_ids = g.node_ids

    def clean_run(rep: int) -> float:
        labels, _ = run_embedding_clustering(
            g, truth.n_true, params=params, seed=derive_seed(seed, "clean", rep)
        )
        return macro_f1(labels, truth, node_ids=node_ids).macro_f1

    def noisy_run(task: tuple[int, int]) -> float:
        spec_idx, rep = task
        kind, level = noise[spec_idx]
        noisy = perturb(
            weight, NoiseSpec(kind, level, seed=derive_seed(seed, "noise", spec_idx, rep)), mode=mode
        )
        g_noisy = build_srg_from_interactions(InteractionMatrix(node_ids, noisy))
        labels, _ = run_embedding_clustering(
            g_noisy, truth.n_true, params=params, seed=derive_seed(seed, "run", spec_idx, rep)
        )
        return macro_f1(labels, truth, node_ids=node_ids).macro_f1

    tasks = [(si, rep) for si in range(len(noise)) for rep in range(repeats)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            clean = list(pool.map(clean_run, range(repeats)))
            noisy_scores = list(pool.map(noisy_run, tasks))
    else:
        clean = [clean_run(r) for r in range(repeats)]
        noisy_scores = [noisy_run(t) for t in tasks]
    curves = {}
    for si, (kind, level) in enumerate(noise):
        vals = np.array([noisy_scores[i] for i, t in enumerate(tasks) if t[0] == si])
        curves[NoiseSpec(kind, level).label] = {
            "kind": kind,
            "level": float(level),
            "mean": float(vals.mean()),
            "std": float(vals.std()),
        }
    return NoiseReport(
        truth_name=truth.name,
        baseline_mean=float(np.mean(clean)),
        curves=curves,
        repeats=repeats,
        mode=mode,
    )


# -- interaction frequency ------------------------------------------------------


@dataclass(frozen=True)
class FrequencyReport:
    """Row-stochastic region-to-region interaction shares."""

    matrix: np.ndarray
    region_labels: tuple[int, ...]
    flagged_rows: tuple[int, ...]  # regions with zero outgoing volume

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["region"] + [f"r{lab}" for lab in self.region_labels])
            for lab, row in zip(self.region_labels, self.matrix):
                writer.writerow([f"r{lab}"] + [repr(float(x)) for x in row])


def interaction_frequency_report(od: InteractionMatrix, labels) -> FrequencyReport:
    """Share of each region's outgoing volume going to every region.

    Cell (i, j) = volume from region i to region j over region i's total
    outgoing volume.  Node self-volumes (the OD diagonal) are ignored.
    Regions with zero outgoing volume are flagged and left as zero rows.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != len(od.node_ids):
        raise ValueError("one label per node required")
    regions = [int(v) for v in np.unique(labels)]
    volumes = od.volumes.copy()
    np.fill_diagonal(volumes, 0.0)
    r = len(regions)
    totals = np.zeros((r, r))
    for a, lab_a in enumerate(regions):
        rows = labels == lab_a
        for b, lab_b in enumerate(regions):
            cols = labels == lab_b
            totals[a, b] = volumes[np.ix_(rows, cols)].sum()
    out = np.zeros_like(totals)
    flagged = []
    for a in range(r):
        row_sum = totals[a].sum()
        if row_sum > 0.0:
            out[a] = totals[a] / row_sum
        else:
            flagged.append(regions[a])
    return FrequencyReport(out, tuple(regions), tuple(flagged))


# -- labels CSV -------------------------------------------------------------------


def save_labels(node_ids, labels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "label"])
        for nid, lab in zip(node_ids, np.asarray(labels).tolist()):
            writer.writerow([nid, int(lab)])


def load_labels(path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["node_id", "label"]:
        raise ValueError(f"{path}: expected header 'node_id,label'")
    ids, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}: line {lineno}: expected 2 fields")
        ids.append(row[0])
        try:
            labels.append(int(row[1]))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-integer label {row[1]!r}") from None
    return tuple(ids), np.array(labels, dtype=np.int64)


def load_ground_truth(path, name: str | None = None) -> GroundTruth:
    ids, labels = load_labels(path)
    truth_name = name if name is not None else Path(path).stem
    return GroundTruth.from_labels(ids, labels, name=truth_name)
