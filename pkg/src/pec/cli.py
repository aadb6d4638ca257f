"""Command-line interface and the end-to-end pipeline runner.

Every subcommand is a thin file-in/file-out wrapper over one library
operation; ``pipeline`` chains them and writes a manifest with config,
derived stage seeds, versions and content hashes so a run is reproducible
byte for byte.  Failures print a machine-readable JSON object on stderr
and exit with status 1 (usage errors exit with 2).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .clusterer import kmeans, louvain, select_n
from .embedder import TrainConfig, load_embeddings, save_embeddings, train
from .evaluator import (
    DEFAULT_PARAMS,
    NoiseSpec,
    interaction_frequency_report,
    load_ground_truth,
    load_labels,
    macro_f1,
    noise_robustness,
    perturb,
    save_labels,
    sweep,
)
from .srg import (
    build_srg_from_features,
    build_srg_from_interactions,
    load_feature_csv,
    load_graph,
    load_od_csv,
    save_feature_csv,
    save_graph,
    save_od_csv,
    InteractionMatrix,
)
from .synth import blobs, default_metro_spec, metro_network, planted_od
from .util import derive_seed, sha256_file, write_json
from .walker import WalkConfig, generate_walks, load_corpus, save_corpus

__all__ = ["PipelineConfig", "PipelineError", "run_pipeline", "main"]


class PipelineError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Everything one end-to-end run needs; flags and config files both
    populate this."""

    # input (exactly one)
    features_path: str | None = None
    od_path: str | None = None
    edges_path: str | None = None
    # SRG-I options
    similarity: str = "gaussian"
    sigma: float = 1.0
    sparsify: str = "none"
    k_nn: int | None = None
    tau: float | None = None
    # walk options
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 10
    num_walks: int = 10
    # training options
    dim: int = 16
    window: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    negatives: int = 5
    batch_size: int = 64
    # clustering options
    n_clusters: int | None = None
    cluster_mode: str = "fixed"  # fixed | auto-indices | auto-louvain
    n_min: int = 2
    n_max: int = 10
    restarts: int = 10
    # evaluation options
    truth_paths: tuple[str, ...] = ()
    repeats: int = 20
    noise: tuple[tuple[str, float], ...] = ()
    noise_mode: str = "scale-noise"
    # run options
    out_dir: str = "pec-run"
    seed: int = 0
    workers: int = 1
    geojson: bool = False

    def validate(self) -> None:
        inputs = [self.features_path, self.od_path, self.edges_path]
        if sum(x is not None for x in inputs) != 1:
            raise ValueError("give exactly one input: features, od or edges")
        for path in inputs + list(self.truth_paths):
            if path is not None and not Path(path).exists():
                raise ValueError(f"input file not found: {path}")
        if self.cluster_mode == "fixed" and self.n_clusters is None:
            raise ValueError("fixed clustering needs --n-clusters")
        if self.cluster_mode not in ("fixed", "auto-indices", "auto-louvain"):
            raise ValueError(f"unknown cluster mode {self.cluster_mode!r}")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def grid_geojson(node_ids, labels, cell_size: float = 500.0) -> dict:
    """Cluster labels over an abstract square lattice (row-major layout)."""
    n = len(node_ids)
    cols = max(1, math.ceil(math.sqrt(n)))
    features = []
    for i, (nid, lab) in enumerate(zip(node_ids, np.asarray(labels).tolist())):
        row, col = divmod(i, cols)
        x0, y0 = col * cell_size, -row * cell_size
        ring = [
            [x0, y0],
            [x0 + cell_size, y0],
            [x0 + cell_size, y0 - cell_size],
            [x0, y0 - cell_size],
            [x0, y0],
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {"node": nid, "label": int(lab)},
            }
        )
    return {"type": "FeatureCollection", "features": features}


# -- pipeline -------------------------------------------------------------------


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run graph -> walks -> embedding -> clustering -> evaluation.

    Writes artifacts plus ``manifest.json`` into ``cfg.out_dir`` and
    returns the manifest.  Raises PipelineError naming the failed stage;
    artifacts of completed stages are retained.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage_seeds = {
        stage: derive_seed(cfg.seed, stage)
        for stage in ("walks", "embed", "cluster", "evaluate")
    }
    manifest: dict = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(cfg).items()},
        "master_seed": cfg.seed,
        "stage_seeds": stage_seeds,
        "versions": {
            "pec": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "inputs": {},
        "outputs": {},
    }
    for path in (cfg.features_path, cfg.od_path, cfg.edges_path, *cfg.truth_paths):
        if path is not None:
            manifest["inputs"][str(path)] = sha256_file(path)

    od = None
    stage = "graph"
    try:
        if cfg.features_path is not None:
            feats = load_feature_csv(cfg.features_path)
            graph = build_srg_from_features(
                feats,
                similarity=cfg.similarity,
                sigma=cfg.sigma,
                sparsify=cfg.sparsify,
                k_nn=cfg.k_nn,
                tau=cfg.tau,
            )
        elif cfg.od_path is not None:
            od = load_od_csv(cfg.od_path)
            graph = build_srg_from_interactions(od)
        else:
            graph = load_graph(cfg.edges_path)
        save_graph(graph, out / "graph.tsv")

        stage = "walks"
        wcfg = WalkConfig(
            p=cfg.p,
            q=cfg.q,
            walk_length=cfg.walk_length,
            num_walks=cfg.num_walks,
            seed=stage_seeds["walks"],
        )
        corpus = generate_walks(graph, wcfg, workers=cfg.workers)
        save_corpus(corpus, out / "corpus.txt")

        stage = "embed"
        tcfg = TrainConfig(
            dim=cfg.dim,
            window=cfg.window,
            epochs=cfg.epochs,
            initial_lr=cfg.initial_lr,
            negatives=cfg.negatives,
            batch_size=cfg.batch_size,
            seed=stage_seeds["embed"],
        )
        emb = train(corpus, tcfg)
        save_embeddings(emb, out / "embeddings.txt")

        stage = "cluster"
        if cfg.cluster_mode == "fixed":
            n_clusters = int(cfg.n_clusters)
        elif cfg.cluster_mode == "auto-louvain":
            _, n_clusters, modularity_q = louvain(graph, seed=stage_seeds["cluster"])
            manifest["louvain"] = {"communities": n_clusters, "modularity": modularity_q}
        else:
            hi = min(cfg.n_max, graph.num_nodes)
            recommended, table = select_n(
                emb.vectors, range(cfg.n_min, hi + 1), seed=stage_seeds["cluster"], restarts=cfg.restarts
            )
            n_clusters = recommended
            selection = {
                str(n): {
                    "davies_bouldin": s.davies_bouldin,
                    "dunn": s.dunn,
                    "silhouette": s.silhouette,
                }
                for n, s in table.items()
            }
            write_json({"recommended": recommended, "scores": selection}, out / "selection.json")
        manifest["n_clusters"] = n_clusters
        if n_clusters < 2:  # louvain can legitimately report one community
            labels = np.zeros(graph.num_nodes, dtype=np.int64)
        else:
            assignment = kmeans(
                emb.vectors, n_clusters, seed=stage_seeds["cluster"], restarts=cfg.restarts
            )
            labels = assignment.labels
        save_labels(graph.node_ids, labels, out / "labels.csv")
        if cfg.geojson:
            write_json(grid_geojson(graph.node_ids, labels), out / "clusters.geojson")

        stage = "evaluate"
        if cfg.truth_paths:
            reports = {}
            for tpath in cfg.truth_paths:
                truth = load_ground_truth(tpath)
                rep = macro_f1(labels, truth, node_ids=graph.node_ids)
                reports[truth.name] = {
                    "macro_f1": rep.macro_f1,
                    "per_class_f1": list(rep.per_class_f1),
                    "matching": {str(k): v for k, v in rep.matching.items()},
                }
                if cfg.noise:
                    noise_rep = noise_robustness(
                        graph,
                        truth,
                        list(cfg.noise),
                        params=_pipeline_params(cfg),
                        repeats=cfg.repeats,
                        seed=stage_seeds["evaluate"],
                        mode=cfg.noise_mode,
                        workers=cfg.workers,
                    )
                    noise_rep.save_csv(out / f"noise_{truth.name}.csv")
                    reports[truth.name]["noise"] = noise_rep.to_json()
            write_json(reports, out / "report.json")
        if od is not None:
            freq = interaction_frequency_report(od, labels)
            freq.save_csv(out / "frequency.csv")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    for artifact in sorted(out.iterdir()):
        if artifact.name != "manifest.json" and artifact.is_file():
            manifest["outputs"][artifact.name] = sha256_file(artifact)
    write_json(manifest, out / "manifest.json")
    return manifest


def _pipeline_params(cfg: PipelineConfig) -> dict:
    return {
        "p": cfg.p,
        "q": cfg.q,
        "walk_length": cfg.walk_length,
        "num_walks": cfg.num_walks,
        "dim": cfg.dim,
        "window": cfg.window,
        "epochs": cfg.epochs,
        "initial_lr": cfg.initial_lr,
        "negatives": cfg.negatives,
        "batch_size": cfg.batch_size,
        "restarts": cfg.restarts,
    }


# -- subcommands ------------------------------------------------------------------


def _cmd_build_graph(args) -> int:
    given = [x for x in (args.features, args.od, args.edges) if x]
    if len(given) != 1:
        raise ValueError("give exactly one of --features / --od / --edges")
    if args.features:
        feats = load_feature_csv(args.features)
        g = build_srg_from_features(
            feats,
            similarity=args.similarity,
            sigma=args.sigma,
            sparsify=args.sparsify,
            k_nn=args.k_nn,
            tau=args.tau,
        )
    elif args.od:
        g = build_srg_from_interactions(load_od_csv(args.od))
    else:
        g = load_graph(args.edges)
    save_graph(g, args.out)
    print(f"wrote {args.out}: {g.num_nodes} nodes, {g.num_edges} edges, "
          f"{len(g.isolated_nodes())} isolated")
    return 0


def _cmd_walks(args) -> int:
    g = load_graph(args.graph)
    cfg = WalkConfig(
        p=args.p, q=args.q, walk_length=args.walk_length, num_walks=args.num_walks, seed=args.seed
    )
    corpus = generate_walks(g, cfg, workers=args.workers)
    save_corpus(corpus, args.out)
    print(f"wrote {args.out}: {len(corpus.walks)} walks")
    return 0


def _cmd_embed(args) -> int:
    corpus = load_corpus(args.corpus)
    cfg = TrainConfig(
        dim=args.dim,
        window=args.window,
        epochs=args.epochs,
        initial_lr=args.lr,
        negatives=args.negatives,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    emb = train(corpus, cfg)
    save_embeddings(emb, args.out)
    print(f"wrote {args.out}: {len(emb.node_ids)} vectors of dim {emb.dim}")
    return 0


def _cmd_cluster(args) -> int:
    emb = load_embeddings(args.embeddings)
    assignment = kmeans(emb.vectors, args.n_clusters, seed=args.seed, restarts=args.restarts)
    save_labels(emb.node_ids, assignment.labels, args.out)
    if args.geojson:
        write_json(grid_geojson(emb.node_ids, assignment.labels), args.geojson)
    print(f"wrote {args.out}: {args.n_clusters} clusters, inertia {assignment.inertia:.6g}")
    return 0


def _cmd_select_n(args) -> int:
    emb = load_embeddings(args.embeddings)
    recommended, table = select_n(
        emb.vectors, range(args.n_min, args.n_max + 1), seed=args.seed, restarts=args.restarts
    )
    payload = {
        "recommended": recommended,
        "scores": {
            str(n): {
                "davies_bouldin": s.davies_bouldin,
                "dunn": s.dunn,
                "silhouette": s.silhouette,
            }
            for n, s in table.items()
        },
    }
    write_json(payload, args.out)
    print(f"recommended n = {recommended}")
    return 0


def _cmd_louvain(args) -> int:
    g = load_graph(args.graph)
    labels, count, q = louvain(g, seed=args.seed, runs=args.runs)
    save_labels(g.node_ids, labels, args.out)
    print(json.dumps({"communities": count, "modularity": q}))
    return 0


def _cmd_evaluate(args) -> int:
    ids, labels = load_labels(args.pred)
    truth = load_ground_truth(args.truth)
    report = macro_f1(labels, truth, node_ids=ids)
    payload = {
        "truth": truth.name,
        "macro_f1": report.macro_f1,
        "per_class_f1": list(report.per_class_f1),
        "matching": {str(k): v for k, v in report.matching.items()},
    }
    if args.out:
        write_json(payload, args.out)
    print(json.dumps(payload, sort_keys=True))
    return 0


def _parse_grid(entries) -> dict:
    grid = {}
    for entry in entries or []:
        key, _, values = entry.partition("=")
        if not values:
            raise ValueError(f"bad grid entry {entry!r}; expected name=v1,v2,...")
        key = key.strip().replace("-", "_")
        grid[key] = [float(v) for v in values.split(",")]
    return grid


def _cmd_sweep(args) -> int:
    g = load_graph(args.graph)
    truths = [load_ground_truth(t) for t in args.truth]
    grid = _parse_grid(args.grid)
    if not grid:
        raise ValueError("give at least one --grid name=v1,v2,...")
    base = {
        key: value
        for key, value in {
            "p": args.p,
            "q": args.q,
            "walk_length": args.walk_length,
            "num_walks": args.num_walks,
            "dim": args.dim,
            "window": args.window,
            "epochs": args.epochs,
        }.items()
        if value is not None
    }
    report = sweep(
        g,
        truths,
        grid,
        base_params=base,
        repeats=args.repeats,
        seed=args.seed,
        include_baselines=args.baselines,
        workers=args.workers,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(report.to_json(), out_dir / "sweep.json")
    report.save_csv(out_dir / "sweep.csv")
    print(f"wrote {out_dir / 'sweep.json'} and {out_dir / 'sweep.csv'}")
    return 0


def _cmd_perturb(args) -> int:
    od = load_od_csv(args.matrix)
    level = args.sigma if args.kind == "gaussian" else args.lam
    if level is None:
        raise ValueError("give --sigma for gaussian noise or --lambda for poisson noise")
    noisy = perturb(od.volumes, NoiseSpec(args.kind, level, seed=args.seed), mode=args.mode)
    save_od_csv(InteractionMatrix(od.node_ids, np.maximum(noisy, 0.0)), args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.fixture == "metro":
        spec = default_metro_spec(args.lines, args.stations, seed=args.seed)
        g, line_truth, transfer_truth = metro_network(spec)
        save_graph(g, out_dir / "edges.tsv")
        save_labels(line_truth.node_ids, line_truth.labels, out_dir / "line-membership.csv")
        save_labels(
            transfer_truth.node_ids, transfer_truth.labels, out_dir / "transfer-vs-not.csv"
        )
        print(f"wrote metro fixture to {out_dir}: {g.num_nodes} stations, {g.num_edges} links")
    elif args.fixture == "od":
        od, truth = planted_od(
            args.blocks, args.nodes_per_block, args.intra, args.inter, seed=args.seed
        )
        save_od_csv(od, out_dir / "od.csv")
        save_labels(truth.node_ids, truth.labels, out_dir / "block-membership.csv")
        print(f"wrote planted OD fixture to {out_dir}: {len(od.node_ids)} nodes")
    else:
        feats, truth = blobs(
            args.clusters,
            args.points,
            dims=args.dims,
            spread=args.spread,
            separation=args.separation,
            seed=args.seed,
        )
        save_feature_csv(feats, out_dir / "features.csv")
        save_labels(truth.node_ids, truth.labels, out_dir / "blob-membership.csv")
        print(f"wrote blob fixture to {out_dir}: {len(feats.node_ids)} points")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = PipelineConfig()
    if args.config:
        overrides = read_config_file(args.config)
        _apply_config(cfg, overrides)
    _apply_flags(cfg, args)
    manifest = run_pipeline(cfg)
    print(f"wrote {Path(cfg.out_dir) / 'manifest.json'} "
          f"({len(manifest['outputs'])} artifacts)")
    return 0


_CONFIG_TYPES = {
    "features_path": str, "od_path": str, "edges_path": str,
    "similarity": str, "sigma": float, "sparsify": str, "k_nn": int, "tau": float,
    "p": float, "q": float, "walk_length": int, "num_walks": int,
    "dim": int, "window": int, "epochs": int, "initial_lr": float,
    "negatives": int, "batch_size": int,
    "n_clusters": int, "cluster_mode": str, "n_min": int, "n_max": int, "restarts": int,
    "repeats": int, "noise_mode": str, "out_dir": str, "seed": int, "workers": int,
    "geojson": lambda s: s.lower() in ("1", "true", "yes"),
}


def _apply_config(cfg: PipelineConfig, overrides: dict) -> None:
    for key, raw in overrides.items():
        if key == "truth":
            cfg.truth_paths = cfg.truth_paths + tuple(raw.split(","))
            continue
        if key == "noise":
            cfg.noise = cfg.noise + tuple(_parse_noise_entry(x) for x in raw.split(","))
            continue
        if key not in _CONFIG_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        setattr(cfg, key, _CONFIG_TYPES[key](raw))


def _parse_noise_entry(entry: str) -> tuple[str, float]:
    kind, _, level = entry.partition(":")
    if kind not in ("gaussian", "poisson") or not level:
        raise ValueError(f"bad noise entry {entry!r}; expected kind:level")
    return kind, float(level)


def _apply_flags(cfg: PipelineConfig, args) -> None:
    mapping = {
        "features": "features_path", "od": "od_path", "edges": "edges_path",
        "similarity": "similarity", "sigma": "sigma", "sparsify": "sparsify",
        "k_nn": "k_nn", "tau": "tau",
        "p": "p", "q": "q", "walk_length": "walk_length", "num_walks": "num_walks",
        "dim": "dim", "window": "window", "epochs": "epochs", "lr": "initial_lr",
        "negatives": "negatives", "batch_size": "batch_size",
        "n_clusters": "n_clusters", "cluster_mode": "cluster_mode",
        "n_min": "n_min", "n_max": "n_max", "restarts": "restarts",
        "repeats": "repeats", "noise_mode": "noise_mode",
        "out_dir": "out_dir", "seed": "seed", "workers": "workers",
    }
    for flag, attr in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "truth", None):
        cfg.truth_paths = cfg.truth_paths + tuple(args.truth)
    if getattr(args, "noise", None):
        cfg.noise = cfg.noise + tuple(_parse_noise_entry(x) for x in args.noise)
    if getattr(args, "geojson", False):
        cfg.geojson = True


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pec",
        description="Graph embedding clustering pipeline for urban structure detection",
    )
    parser.add_argument("--version", action="version", version=f"pec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("build-graph", help="build a space relation graph from a matrix")
    g.add_argument("--features")
    g.add_argument("--od")
    g.add_argument("--edges")
    g.add_argument("--similarity", choices=("gaussian", "cosine"), default="gaussian")
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--sparsify", choices=("none", "knn", "threshold"), default="none")
    g.add_argument("--k-nn", dest="k_nn", type=int)
    g.add_argument("--tau", type=float)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_build_graph)

    w = sub.add_parser("walks", help="sample the biased second-order walk corpus")
    w.add_argument("--graph", required=True)
    w.add_argument("--p", type=float, default=1.0)
    w.add_argument("--q", type=float, default=1.0)
    w.add_argument("--walk-length", type=int, default=10)
    w.add_argument("--num-walks", type=int, default=10)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", required=True)
    w.set_defaults(func=_cmd_walks)

    e = sub.add_parser("embed", help="train skip-gram embeddings from a corpus")
    e.add_argument("--corpus", required=True)
    e.add_argument("--dim", type=int, default=16)
    e.add_argument("--window", type=int, default=5)
    e.add_argument("--epochs", type=int, default=5)
    e.add_argument("--lr", type=float, default=0.025)
    e.add_argument("--negatives", type=int, default=5)
    e.add_argument("--batch-size", type=int, default=64)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True)
    e.set_defaults(func=_cmd_embed)

    c = sub.add_parser("cluster", help="k-means on an embedding matrix")
    c.add_argument("--embeddings", required=True)
    c.add_argument("--n-clusters", type=int, required=True)
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--geojson")
    c.set_defaults(func=_cmd_cluster)

    s = sub.add_parser("select-n", help="score candidate cluster counts")
    s.add_argument("--embeddings", required=True)
    s.add_argument("--n-min", type=int, default=2)
    s.add_argument("--n-max", type=int, default=10)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_select_n)

    l = sub.add_parser("louvain", help="community count via fast unfolding")
    l.add_argument("--graph", required=True)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--runs", type=int, default=5)
    l.add_argument("--out", required=True)
    l.set_defaults(func=_cmd_louvain)

    ev = sub.add_parser("evaluate", help="Macro-F1 of predicted labels vs a ground truth")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--out")
    ev.set_defaults(func=_cmd_evaluate)

    sw = sub.add_parser("sweep", help="grid of seeded pipeline runs")
    sw.add_argument("--graph", required=True)
    sw.add_argument("--truth", action="append", required=True)
    sw.add_argument("--grid", action="append", metavar="NAME=V1,V2,...")
    sw.add_argument("--p", type=float)
    sw.add_argument("--q", type=float)
    sw.add_argument("--walk-length", type=int)
    sw.add_argument("--num-walks", type=int)
    sw.add_argument("--dim", type=int)
    sw.add_argument("--window", type=int)
    sw.add_argument("--epochs", type=int)
    sw.add_argument("--repeats", type=int, default=20)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--baselines", action="store_true")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out-dir", required=True)
    sw.set_defaults(func=_cmd_sweep)

    pe = sub.add_parser("perturb", help="add seeded noise to an interaction matrix")
    pe.add_argument("--matrix", required=True)
    pe.add_argument("--kind", choices=("gaussian", "poisson"), required=True)
    pe.add_argument("--sigma", type=float)
    pe.add_argument("--lambda", dest="lam", type=float)
    pe.add_argument("--mode", choices=("scale-noise", "clip-result"), default="scale-noise")
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=_cmd_perturb)

    sy = sub.add_parser("synth", help="generate synthetic fixtures")
    sy_sub = sy.add_subparsers(dest="fixture", required=True)
    m = sy_sub.add_parser("metro", help="metro-style network with dual ground truths")
    m.add_argument("--lines", type=int, default=11)
    m.add_argument("--stations", type=int, default=10)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out-dir", required=True)
    m.set_defaults(func=_cmd_synth, fixture="metro")
    o = sy_sub.add_parser("od", help="planted-partition interaction matrix")
    o.add_argument("--blocks", type=int, default=4)
    o.add_argument("--nodes-per-block", type=int, default=15)
    o.add_argument("--intra", type=float, default=9.0)
    o.add_argument("--inter", type=float, default=1.0)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out-dir", required=True)
    o.set_defaults(func=_cmd_synth, fixture="od")
    b = sy_sub.add_parser("blobs", help="Gaussian blob feature matrix")
    b.add_argument("--clusters", type=int, default=3)
    b.add_argument("--points", type=int, default=30)
    b.add_argument("--dims", type=int, default=5)
    b.add_argument("--spread", type=float, default=0.5)
    b.add_argument("--separation", type=float, default=5.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=_cmd_synth, fixture="blobs")

    pl = sub.add_parser("pipeline", help="run the whole pipeline with a manifest")
    pl.add_argument("--config")
    pl.add_argument("--features")
    pl.add_argument("--od")
    pl.add_argument("--edges")
    pl.add_argument("--similarity", choices=("gaussian", "cosine"))
    pl.add_argument("--sigma", type=float)
    pl.add_argument("--sparsify", choices=("none", "knn", "threshold"))
    pl.add_argument("--k-nn", dest="k_nn", type=int)
    pl.add_argument("--tau", type=float)
    pl.add_argument("--p", type=float)
    pl.add_argument("--q", type=float)
    pl.add_argument("--walk-length", type=int)
    pl.add_argument("--num-walks", type=int)
    pl.add_argument("--dim", type=int)
    pl.add_argument("--window", type=int)
    pl.add_argument("--epochs", type=int)
    pl.add_argument("--lr", type=float)
    pl.add_argument("--negatives", type=int)
    pl.add_argument("--batch-size", type=int)
    pl.add_argument("--n-clusters", type=int)
    pl.add_argument("--cluster-mode", choices=("fixed", "auto-indices", "auto-louvain"))
    pl.add_argument("--n-min", type=int)
    pl.add_argument("--n-max", type=int)
    pl.add_argument("--restarts", type=int)
    pl.add_argument("--truth", action="append")
    pl.add_argument("--repeats", type=int)
    pl.add_argument("--noise", action="append", metavar="KIND:LEVEL")
    pl.add_argument("--noise-mode", choices=("scale-noise", "clip-result"))
    pl.add_argument("--seed", type=int)
    pl.add_argument("--workers", type=int)
    pl.add_argument("--geojson", action="store_true")
    pl.add_argument("--out-dir", required=True)
    pl.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        payload = {"error": type(exc.cause).__name__, "stage": exc.stage, "message": str(exc.cause)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    except Exception as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
