"""Skip-gram embeddings with negative sampling, trained from a walk corpus.

Every node gets a d-dimensional vector; co-occurrence within a window of
the walks pulls vectors together, sampled negatives push them apart.  The
per-pair objective is

    loss = -ln sigmoid(u . v)  -  sum_n ln sigmoid(-u . v_n)

with u the center vector, v the context vector and v_n the sampled
negative context vectors.  Training is plain SGD with a linearly decaying
learning rate, applied in small batches; it is single-threaded by design
so a seed fully determines the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .walker import AliasTable, WalkCorpus

__all__ = [
    "TrainConfig",
    "EmbeddingMatrix",
    "TrainingDiverged",
    "extract_pairs",
    "sgns_loss_and_grad",
    "train",
    "save_embeddings",
    "load_embeddings",
]

LR_FLOOR_FACTOR = 1e-4  # lr never decays below initial_lr * this
NEGATIVE_EXPONENT = 0.75  # unigram smoothing for the negative distribution


class TrainingDiverged(RuntimeError):
    """Raised when training produces a non-finite loss or vectors."""


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 16
    window: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    negatives: int = 5
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if not (self.initial_lr > 0):
            raise ValueError("initial_lr must be positive")
        if self.negatives < 1:
            raise ValueError("negatives must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Learned vectors (one row per node) plus the training-side context
    vectors; ``vectors`` is the representation used downstream."""

    node_ids: tuple[str, ...]
    vectors: np.ndarray
    context_vectors: np.ndarray
    epoch_mean_loss: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.vectors.shape != self.context_vectors.shape:
            raise ValueError("vector matrices must have identical shapes")
        if self.vectors.shape[0] != len(self.node_ids):
            raise ValueError("one vector row per node required")
        if not (np.all(np.isfinite(self.vectors)) and np.all(np.isfinite(self.context_vectors))):
            raise ValueError("embedding entries must be finite")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, node_id: str) -> np.ndarray:
        return self.vectors[self.node_ids.index(node_id)]


def _pair_indices(corpus: WalkCorpus, window: int) -> tuple[np.ndarray, np.ndarray]:
    index = {nid: i for i, nid in enumerate(corpus.node_ids)}
    centers: list[int] = []
    contexts: list[int] = []
    for walk in corpus.walks:
        idx = [index[nid] for nid in walk]
        length = len(idx)
        for i in range(length):
            lo = max(0, i - window)
            hi = min(length, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(idx[i])
                    contexts.append(idx[j])
    return np.array(centers, dtype=np.int64), np.array(contexts, dtype=np.int64)


def extract_pairs(corpus: WalkCorpus, window: int) -> list[tuple[str, str]]:
    """(center, context) pairs for every walk position within the window."""
    if window < 1:
        raise ValueError("window must be at least 1")
    if not corpus.walks:
        raise ValueError("corpus is empty")
    centers, contexts = _pair_indices(corpus, window)
    ids = corpus.node_ids
    return [(ids[c], ids[x]) for c, x in zip(centers, contexts)]


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sgns_loss_and_grad(center_vec, context_vec, negative_vecs):
    """Loss and exact gradients for one (center, context, negatives) sample.

    Returns (loss, grad_center, grad_context, grad_negatives); the sigmoid
    is evaluated in an overflow-safe form, so the loss is finite for any
    finite inputs.
    """
    u = np.asarray(center_vec, dtype=float)
    v = np.asarray(context_vec, dtype=float)
    negs = np.asarray(negative_vecs, dtype=float)
    if negs.ndim == 1:
        negs = negs.reshape(1, -1)
    pos_score = float(u @ v)
    neg_scores = negs @ u
    loss = float(_softplus(-pos_score) + _softplus(neg_scores).sum())
    sig_pos = float(_sigmoid(np.array([pos_score]))[0])
    sig_neg = _sigmoid(neg_scores)
    grad_center = (sig_pos - 1.0) * v + sig_neg @ negs
    grad_context = (sig_pos - 1.0) * u
    grad_negatives = sig_neg[:, None] * u[None, :]
    return loss, grad_center, grad_context, grad_negatives


def _negative_table(corpus: WalkCorpus) -> AliasTable:
    counts = np.zeros(len(corpus.node_ids))
    index = {nid: i for i, nid in enumerate(corpus.node_ids)}
    for walk in corpus.walks:
        for nid in walk:
            counts[index[nid]] += 1
    weights = counts**NEGATIVE_EXPONENT
    return AliasTable(weights / weights.sum())


def train(corpus: WalkCorpus, cfg: TrainConfig) -> EmbeddingMatrix:
    """Learn node vectors from the corpus.

    Negatives are drawn from the corpus unigram distribution raised to the
    3/4 power.  Center vectors start uniform in [-0.5/d, 0.5/d], context
    vectors at zero.  Deterministic for a fixed config.
    """
    n = len(corpus.node_ids)
    if n == 0:
        raise ValueError("corpus has no nodes")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    d = cfg.dim
    vectors = (rng.random((n, d)) - 0.5) / d
    contexts = np.zeros((n, d))

    centers_idx, contexts_idx = _pair_indices(corpus, cfg.window)
    n_pairs = centers_idx.size
    epoch_losses: list[float] = []
    if cfg.epochs == 0 or n_pairs == 0:
        return EmbeddingMatrix(corpus.node_ids, vectors, contexts, ())

    neg_table = _negative_table(corpus)
    m = cfg.negatives
    total_updates = cfg.epochs * n_pairs
    done = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n_pairs)
        negs = neg_table.draw_many(rng, (n_pairs, m))
        loss_sum = 0.0
        # divergence shows up as non-finite scores; detected and raised below
        with np.errstate(invalid="ignore", over="ignore"):
            for start in range(0, n_pairs, cfg.batch_size):
                sel = order[start:start + cfg.batch_size]
                cen = centers_idx[sel]
                tgt = np.concatenate(
                    [contexts_idx[sel][:, None], negs[start:start + sel.size]], axis=1
                )
                u = vectors[cen]  # (B, d)
                v = contexts[tgt]  # (B, m+1, d)
                scores = np.einsum("bkd,bd->bk", v, u)
                loss_sum += float(
                    _softplus(-scores[:, 0]).sum() + _softplus(scores[:, 1:]).sum()
                )
                coef = _sigmoid(scores)
                coef[:, 0] -= 1.0
                lr = cfg.initial_lr * max(1.0 - done / total_updates, LR_FLOOR_FACTOR)
                grad_u = np.einsum("bk,bkd->bd", coef, v)
                grad_v = coef[:, :, None] * u[:, None, :]
                np.add.at(vectors, cen, -lr * grad_u)
                np.add.at(contexts, tgt.reshape(-1), (-lr * grad_v).reshape(-1, d))
                done += sel.size
        mean_loss = loss_sum / n_pairs
        if not np.isfinite(mean_loss):
            raise TrainingDiverged(
                f"non-finite training loss ({mean_loss}); lower initial_lr "
                f"(currently {cfg.initial_lr})"
            )
        epoch_losses.append(mean_loss)
    if not np.all(np.isfinite(vectors)):
        raise TrainingDiverged("non-finite embedding entries; lower initial_lr")
    return EmbeddingMatrix(corpus.node_ids, vectors, contexts, tuple(epoch_losses))


def save_embeddings(emb: EmbeddingMatrix, path) -> None:
    """Text format: ``N d`` header, then ``node_id v1 ... vd`` per node."""
    n, d = emb.vectors.shape
    lines = [f"{n} {d}"]
    for nid, row in zip(emb.node_ids, emb.vectors):
        lines.append(nid + " " + " ".join(f"{x:.17g}" for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_embeddings(path) -> EmbeddingMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty embedding file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}: line 1: expected header 'N d'")
    n, d = int(head[0]), int(head[1])
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: header declares {n} rows, found {len(lines) - 1}")
    ids, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != d + 1:
            raise ValueError(f"{path}: line {lineno}: expected {d} values, got {len(parts) - 1}")
        ids.append(parts[0])
        try:
            rows.append([float(x) for x in parts[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric vector entry") from None
    vectors = np.array(rows)
    return EmbeddingMatrix(tuple(ids), vectors, np.zeros_like(vectors), ())
