"""Independent reference implementations used to check the library.

Everything here is deliberately brute force (enumeration, finite
differences, direct definitions) and shares no code with the package.
"""

import itertools

import numpy as np

from pec.embedder import sgns_loss_and_grad
from pec.srg import SpaceRelationGraph


def brute_force_kmeans(x, n):
    """Exhaustive minimum inertia over all partitions into n nonempty
    clusters, enumerated in canonical first-appearance labeling."""
    x = np.asarray(x, dtype=float)
    n_pts = x.shape[0]
    best = np.inf
    best_labels = None

    def recurse(idx, labels, used):
        nonlocal best, best_labels
        if n_pts - idx < n - used:
            return
        if idx == n_pts:
            if used != n:
                return
            inertia = 0.0
            arr = np.array(labels)
            for k in range(n):
                members = x[arr == k]
                inertia += float(((members - members.mean(axis=0)) ** 2).sum())
            if inertia < best:
                best = inertia
                best_labels = arr.copy()
            return
        for lab in range(min(used + 1, n)):
            labels.append(lab)
            recurse(idx + 1, labels, max(used, lab + 1))
            labels.pop()

    recurse(0, [], 0)
    return best, best_labels


def brute_force_macro_f1(pred, truth_labels, n_true):
    """Best macro F1 over all injective label matchings, by enumeration."""
    pred_values = sorted(set(pred))
    best = 0.0
    slots = list(range(n_true)) + [None] * max(0, len(pred_values) - n_true)
    for perm in set(itertools.permutations(slots, len(pred_values))):
        per_class = [0.0] * n_true
        for value, target in zip(pred_values, perm):
            if target is None:
                continue
            tp = sum(1 for p, t in zip(pred, truth_labels) if p == value and t == target)
            p_size = sum(1 for p in pred if p == value)
            t_size = sum(1 for t in truth_labels if t == target)
            if p_size + t_size:
                per_class[target] = 2.0 * tp / (p_size + t_size)
        best = max(best, sum(per_class) / n_true)
    return best


def silhouette_oracle(x, labels):
    """Per-point silhouette straight from the definition."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    values = []
    for i in range(x.shape[0]):
        own = [j for j in range(x.shape[0]) if labels[j] == labels[i] and j != i]
        if not own:
            values.append(0.0)
            continue
        a = np.mean([np.linalg.norm(x[i] - x[j]) for j in own])
        b = min(
            np.mean([np.linalg.norm(x[i] - x[j]) for j in range(x.shape[0]) if labels[j] == c])
            for c in set(labels.tolist())
            if c != labels[i]
        )
        values.append((b - a) / max(a, b))
    return values


def sgns_finite_difference_error(rng, d=5, m=3, h=1e-5):
    """Worst relative error of analytic gradients vs central differences."""
    u = rng.normal(size=d)
    v = rng.normal(size=d)
    negs = rng.normal(size=(m, d))
    _, gu, gv, gn = sgns_loss_and_grad(u, v, negs)

    def loss_at(u2, v2, n2):
        return sgns_loss_and_grad(u2, v2, n2)[0]

    worst = 0.0
    for idx in range(d):
        for vec, grad, apply in (
            (u, gu, lambda x: loss_at(x, v, negs)),
            (v, gv, lambda x: loss_at(u, x, negs)),
        ):
            step = np.zeros(d)
            step[idx] = h
            numeric = (apply(vec + step) - apply(vec - step)) / (2 * h)
            denom = max(abs(numeric), abs(grad[idx]), 1e-8)
            worst = max(worst, abs(numeric - grad[idx]) / denom)
    for k in range(m):
        for idx in range(d):
            stepm = np.zeros((m, d))
            stepm[k, idx] = h
            numeric = (loss_at(u, v, negs + stepm) - loss_at(u, v, negs - stepm)) / (2 * h)
            denom = max(abs(numeric), abs(gn[k, idx]), 1e-8)
            worst = max(worst, abs(numeric - gn[k, idx]) / denom)
    return worst


def random_disconnected_graph(rng, with_isolated=True):
    """Components built from random spanning trees plus extra edges."""
    n_components = int(rng.integers(2, 5))
    ids = []
    edges = []
    counter = 0
    for _ in range(n_components):
        size = int(rng.integers(2, 6))
        members = [f"n{counter + i}" for i in range(size)]
        counter += size
        ids.extend(members)
        for i in range(1, size):
            j = int(rng.integers(0, i))
            edges.append((members[j], members[i], float(rng.uniform(0.5, 2.0))))
        for _ in range(size):
            a, b = rng.integers(0, size, size=2)
            if a != b:
                key = (members[min(a, b)], members[max(a, b)])
                if not any(e[:2] == key for e in edges):
                    edges.append((key[0], key[1], float(rng.uniform(0.5, 2.0))))
    n_isolated = int(rng.integers(0, 3)) if with_isolated else 0
    for _ in range(n_isolated):
        ids.append(f"iso{counter}")
        counter += 1
    return SpaceRelationGraph(ids, edges), n_components + n_isolated


def count_components(g):
    parent = list(range(g.num_nodes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for u, v, _ in g.edges():
        a, b = find(g.index(u)), find(g.index(v))
        if a != b:
            parent[a] = b
    return len({find(i) for i in range(g.num_nodes)})
