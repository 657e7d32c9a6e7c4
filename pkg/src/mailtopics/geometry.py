"""Dimensionality reduction and clustering of document embeddings.

The reducer is seeded PCA: deterministic, with an exact out-of-sample
projection for new emails. The density clusterer follows the standard
hierarchical density clustering recipe — mutual-reachability distances,
a minimum spanning tree, a condensed cluster tree, and excess-of-mass
cluster extraction — with min_cluster_size as the floor and -1 as the
outlier label. A seeded k-means (with k-means++ init) is kept as the
alternative the original experiments compared against.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInputError, InsufficientDataError, NoTopicsError

# Inverse-distance density: cap at 1/1e-10 so coincident points stay finite.
_MIN_DIST = 1e-10


@dataclass(frozen=True)
class ReducerModel:
    kind: str
    mean: np.ndarray
    components: np.ndarray  # (out_dim, in_dim), orthonormal rows
    seed: int

    @property
    def in_dim(self) -> int:
        return self.components.shape[1]

    @property
    def out_dim(self) -> int:
        return self.components.shape[0]


def fit_reducer(vectors: np.ndarray, out_dim: int, seed: int) -> ReducerModel:
    """Fit a PCA reducer capturing the top out_dim variance directions."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D array of embeddings")
    if X.shape[0] < out_dim:
        raise InsufficientDataError(
            f"need at least {out_dim} samples to fit a {out_dim}-D reducer, got {X.shape[0]}"
        )
    mean = X.mean(axis=0)
    _, _, vt = np.linalg.svd(X - mean, full_matrices=False)
    components = vt[:out_dim].copy()
    # Fix signs so the fit is unique: largest-magnitude loading is positive.
    for row in components:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    return ReducerModel(kind="pca", mean=mean, components=components, seed=seed)


def project(model: ReducerModel, vectors: np.ndarray) -> np.ndarray:
    """Project embeddings into the reduced space: (v - mean) @ components.T."""
    X = np.asarray(vectors, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.in_dim:
        raise ValueError(f"dimension mismatch: {X.shape[1]} != {model.in_dim}")
    out = (X - model.mean) @ model.components.T
    return out[0] if single else out


@dataclass
class ClusterConfig:
    algorithm: str = "density"  # density | kmeans
    min_cluster_size: int = 100
    k: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("density", "kmeans"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "kmeans" and not self.k:
            raise ValueError("kmeans requires k")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be >= 1")


@dataclass
class ClusterResult:
    labels: np.ndarray  # (n,) ints in {-1, 0, .., K-1}
    n_topics: int
    centroids: np.ndarray  # (K, dim), mean of member points
    sizes: np.ndarray  # (K,)

    def outlier_count(self) -> int:
        return int(np.sum(self.labels == -1))


def _pairwise_euclidean(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def _mst_edges(weights: np.ndarray) -> list[tuple[float, int, int]]:
    """Prim's algorithm over a dense weight matrix; O(n^2)."""
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    best[0] = 0.0
    edges: list[tuple[float, int, int]] = []
    for _ in range(n):
        masked = np.where(in_tree, np.inf, best)
        u = int(np.argmin(masked))
        in_tree[u] = True
        if parent[u] >= 0:
            a, b = sorted((u, int(parent[u])))
            edges.append((float(best[u]), a, b))
        improve = (~in_tree) & (weights[u] < best)
        best[improve] = weights[u][improve]
        parent[improve] = u
    edges.sort()
    return edges


def _single_linkage(edges, n: int) -> np.ndarray:
    """Union-find over sorted edges; rows (left, right, dist, size)."""
    uf_parent = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while uf_parent[root] != root:
            root = uf_parent[root]
        while uf_parent[x] != root:
            uf_parent[x], x = root, uf_parent[x]
        return root

    rows = np.zeros((n - 1, 4), dtype=np.float64)
    for i, (w, a, b) in enumerate(edges):
        ra, rb = find(a), find(b)
        new = n + i
        uf_parent[ra] = uf_parent[rb] = new
        size[new] = size[ra] + size[rb]
        rows[i] = (ra, rb, w, size[new])
    return rows


def _bfs_nodes(slt: np.ndarray, n: int, start: int) -> list[int]:
    order = []
    queue = deque([start])
    while queue:
        node = queue.popleft()
        order.append(node)
        if node >= n:
            left, right = int(slt[node - n, 0]), int(slt[node - n, 1])
            queue.append(left)
            queue.append(right)
    return order


def _leaves_under(slt: np.ndarray, n: int, start: int) -> list[int]:
    return [v for v in _bfs_nodes(slt, n, start) if v < n]


def _condense_tree(slt: np.ndarray, n: int, mcs: int):
    """Condensed cluster tree: rows (parent, child, lambda, child_size).

    Children smaller than mcs fall out of their parent as points at the
    split's lambda; a lone surviving child keeps the parent's label.
    """
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    ignore = set()
    rows: list[tuple[int, int, float, int]] = []
    node_size = lambda v: 1 if v < n else int(slt[v - n, 3])

    for node in _bfs_nodes(slt, n, root):
        if node < n or node in ignore:
            continue
        left, right = int(slt[node - n, 0]), int(slt[node - n, 1])
        dist = float(slt[node - n, 2])
        lam = 1.0 / max(dist, _MIN_DIST)
        parent_label = relabel[node]
        ls, rs = node_size(left), node_size(right)
        big = [c for c, s in ((left, ls), (right, rs)) if s >= mcs]
        if len(big) == 2:
            for child, csize in ((left, ls), (right, rs)):
                relabel[child] = next_label
                rows.append((parent_label, next_label, lam, csize))
                next_label += 1
        elif len(big) == 0:
            for child in (left, right):
                for p in _leaves_under(slt, n, child):
                    rows.append((parent_label, p, lam, 1))
                ignore.update(v for v in _bfs_nodes(slt, n, child) if v >= n)
        else:
            survivor = big[0]
            shattered = right if survivor == left else left
            relabel[survivor] = parent_label
            for p in _leaves_under(slt, n, shattered):
                rows.append((parent_label, p, lam, 1))
            ignore.update(v for v in _bfs_nodes(slt, n, shattered) if v >= n)
    return rows


def _eom_select(rows, n: int) -> list[int]:
    """Excess-of-mass cluster selection; the root is never a cluster."""
    births: dict[int, float] = {n: 0.0}
    for parent, child, lam, csize in rows:
        if csize > 1:
            births[child] = lam
    stability = {c: 0.0 for c in births}
    for parent, child, lam, csize in rows:
        stability[parent] += (lam - births[parent]) * csize

    children: dict[int, list[int]] = {c: [] for c in births}
    for parent, child, lam, csize in rows:
        if csize > 1:
            children[parent].append(child)

    is_cluster = {c: True for c in births if c != n}
    for node in sorted(is_cluster, reverse=True):
        child_total = sum(stability[ch] for ch in children[node])
        if children[node] and child_total > stability[node]:
            is_cluster[node] = False
            stability[node] = child_total
        else:
            stack = list(children[node])
            while stack:
                sub = stack.pop()
                is_cluster[sub] = False
                stack.extend(children[sub])
    return [c for c, keep in is_cluster.items() if keep]


def _density_labels(X: np.ndarray, mcs: int) -> np.ndarray:
    n = X.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    if n < mcs:
        return labels
    dist = _pairwise_euclidean(X)
    kth = min(mcs, n)
    core = np.partition(dist, kth - 1, axis=1)[:, kth - 1]
    mreach = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    if float(mreach.max()) <= _MIN_DIST:
        labels[:] = 0  # all points coincide: one cluster
        return labels

    edges = _mst_edges(mreach)
    slt = _single_linkage(edges, n)
    rows = _condense_tree(slt, n, mcs)
    selected = set(_eom_select(rows, n))
    if not selected:
        return labels

    cluster_parent = {child: parent for parent, child, _, csize in rows if csize > 1}
    point_parent = {child: parent for parent, child, _, csize in rows if csize == 1}
    raw: dict[int, list[int]] = {c: [] for c in selected}
    for p, cluster in point_parent.items():
        node = cluster
        while node is not None and node not in selected:
            node = cluster_parent.get(node)
        if node is not None:
            raw[node].append(p)

    # Topic ids by size descending, ties by smallest member index.
    ordered = sorted(raw.items(), key=lambda kv: (-len(kv[1]), min(kv[1])))
    for topic, (_, members) in enumerate(ordered):
        labels[np.asarray(members, dtype=np.int64)] = topic
    return labels


def _kmeans_labels(X: np.ndarray, k: int, seed: int, max_iter: int = 300, tol: float = 1e-6) -> np.ndarray:
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    k = min(k, n)
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    centers[0] = X[rng.integers(n)]
    closest = np.full(n, np.inf)
    for j in range(1, k):
        d2 = np.sum((X - centers[j - 1]) ** 2, axis=1)
        np.minimum(closest, d2, out=closest)
        total = closest.sum()
        if total <= 0:
            centers[j] = X[rng.integers(n)]
        else:
            centers[j] = X[rng.choice(n, p=closest / total)]

    prev_wcss = np.inf
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        wcss = float(d2[np.arange(n), labels].sum())
        assert wcss <= prev_wcss + 1e-9, "k-means objective increased"
        for j in range(k):
            members = X[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
        if prev_wcss - wcss < tol:
            break
        prev_wcss = wcss
    return labels


def cluster(points: np.ndarray, cfg: ClusterConfig) -> ClusterResult:
    """Cluster reduced vectors; density may label points -1 (outliers)."""
    X = np.asarray(points, dtype=np.float64)
    if X.size == 0:
        raise EmptyInputError("no points to cluster")
    if cfg.algorithm == "density":
        labels = _density_labels(X, cfg.min_cluster_size)
    else:
        labels = _kmeans_labels(X, int(cfg.k), cfg.seed)
    n_topics = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    centroids = np.zeros((n_topics, X.shape[1]), dtype=np.float64)
    sizes = np.zeros(n_topics, dtype=np.int64)
    for t in range(n_topics):
        members = X[labels == t]
        sizes[t] = len(members)
        centroids[t] = members.mean(axis=0)
    return ClusterResult(labels=labels, n_topics=n_topics, centroids=centroids, sizes=sizes)


def recompute_geometry(points: np.ndarray, labels: np.ndarray) -> ClusterResult:
    """Rebuild centroids/sizes after labels changed (merges, outlier moves)."""
    X = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_topics = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    centroids = np.zeros((n_topics, X.shape[1]), dtype=np.float64)
    sizes = np.zeros(n_topics, dtype=np.int64)
    for t in range(n_topics):
        members = X[labels == t]
        sizes[t] = len(members)
        if len(members):
            centroids[t] = members.mean(axis=0)
    return ClusterResult(labels=labels, n_topics=n_topics, centroids=centroids, sizes=sizes)


def cosine_distances(matrix: np.ndarray, v: np.ndarray) -> np.ndarray:
    """1 - cosine similarity of v against each row; zero vectors -> 1.0."""
    M = np.asarray(matrix, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    norms = np.linalg.norm(M, axis=1)
    vnorm = np.linalg.norm(v)
    sims = np.zeros(M.shape[0], dtype=np.float64)
    ok = norms > 0
    if vnorm > 0:
        sims[ok] = (M[ok] @ v) / (norms[ok] * vnorm)
    return 1.0 - sims


def nearest_centroid(result: ClusterResult, p: np.ndarray) -> tuple[int, np.ndarray]:
    """Closest centroid by cosine distance; ties go to the lowest topic id."""
    if result.n_topics == 0:
        raise NoTopicsError("model has no topics")
    distances = cosine_distances(result.centroids, p)
    return int(np.argmin(distances)), distances
