"""End-to-end topic model: fit, assign, curate, persist.

The fitted model is an immutable value; every curation operation (outlier
reduction, merging, labeling) returns a new model and leaves the original
untouched, so a live service can hot-swap models atomically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .embed import EmbeddingProvider, make_provider
from .errors import NoClassesError, NoTopicsError
from .filters import Disposition, DispositionKind
from .geometry import (
    ClusterConfig,
    ClusterResult,
    ReducerModel,
    cluster,
    fit_reducer,
    nearest_centroid,
    project,
    recompute_geometry,
)
from .represent import (
    CTfIdfModel,
    TopicRepresentation,
    Vocabulary,
    apply_seed_topics,
    build_vocabulary,
    doc_ctfidf_vector,
    fit_ctfidf,
    load_default_stopwords,
    sparse_cosine_similarities,
    topic_keywords,
)
from .textprep import CleanDocument

FORMAT_VERSION = 1
OUTLIER_TOPIC = -1


@dataclass
class ModelConfig:
    embed_provider: str = "reference"
    reduce_out_dim: int = 5
    min_topic_size: int = 100
    nr_topics: Optional[int] = None
    min_df: int = 20
    top_n_keywords: int = 10
    seed: int = 0
    seed_topics: Optional[list[list[str]]] = None
    seed_blend: float = 0.5
    calculate_probabilities: bool = False
    cluster_algorithm: str = "density"
    kmeans_k: Optional[int] = None
    extra_stopwords: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.min_topic_size < 2:
            raise ValueError("min_topic_size must be >= 2")
        if self.reduce_out_dim < 1:
            raise ValueError("reduce_out_dim must be >= 1")

    def to_dict(self) -> dict:
        return {
            "embed_provider": self.embed_provider,
            "reduce_out_dim": self.reduce_out_dim,
            "min_topic_size": self.min_topic_size,
            "nr_topics": self.nr_topics,
            "min_df": self.min_df,
            "top_n_keywords": self.top_n_keywords,
            "seed": self.seed,
            "seed_topics": self.seed_topics,
            "seed_blend": self.seed_blend,
            "calculate_probabilities": self.calculate_probabilities,
            "cluster_algorithm": self.cluster_algorithm,
            "kmeans_k": self.kmeans_k,
            "extra_stopwords": list(self.extra_stopwords),
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        return ModelConfig(**d)


@dataclass
class TopicAssignment:
    email_id: str
    model_topic: int
    probabilities: Optional[np.ndarray]
    derived_label: str
    truncated: bool
    disposition: Disposition = Disposition(DispositionKind.PROCESS)


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    distance: float
    new_id: int


@dataclass(frozen=True)
class TopicHierarchy:
    n_leaves: int
    steps: tuple[MergeStep, ...]


@dataclass(frozen=True)
class SecondTopicSuggestion:
    derived_label: str
    experimental: bool = True


def _softmax_neg(distances: np.ndarray) -> np.ndarray:
    scores = -np.asarray(distances, dtype=np.float64)
    scores -= scores.max()
    e = np.exp(scores)
    return e / e.sum()


@dataclass
class FittedTopicModel:
    config: ModelConfig
    provider: EmbeddingProvider
    reducer: ReducerModel
    clusters: ClusterResult
    ctfidf: CTfIdfModel
    representations: list[TopicRepresentation]
    custom_labels: dict[int, str]
    derived_map: dict[int, str]  # may include -1 for the outlier group
    representative_docs: dict[int, list[str]]
    version: int = FORMAT_VERSION

    @property
    def n_topics(self) -> int:
        return self.clusters.n_topics

    # ------------------------------------------------------------------ #
    # Assignment
    # ------------------------------------------------------------------ #

    def _assign_text(self, text: str) -> tuple[int, np.ndarray, bool]:
        truncated = self.provider.count_tokens(text) > self.provider.max_tokens
        emb = self.provider.embed_batch([text])[0]
        reduced = project(self.reducer, emb)
        topic, distances = nearest_centroid(self.clusters, reduced)
        return topic, distances, truncated

    def transform(self, cleaned: CleanDocument) -> TopicAssignment:
        """Assign a cleaned email to its nearest topic."""
        topic, distances, truncated = self._assign_text(cleaned.text)
        probs = _softmax_neg(distances) if self.config.calculate_probabilities else None
        return TopicAssignment(
            email_id=cleaned.email_id,
            model_topic=topic,
            probabilities=probs,
            derived_label=self.derived_map.get(topic, ""),
            truncated=truncated,
        )

    # ------------------------------------------------------------------ #
    # Curation
    # ------------------------------------------------------------------ #

    def reduce_outliers(self, docs: Sequence[CleanDocument]) -> "FittedTopicModel":
        """Reassign outliers to their best-matching topic representation.

        A document whose own class-based TF-IDF vector is all zero (no
        vocabulary term) stays an outlier. Class statistics, keyword
        representations, and centroids refresh once afterwards; labels of
        non-outlier documents never change.
        """
        labels = np.array(self.clusters.labels, copy=True)
        moved = False
        for i, doc in enumerate(docs):
            if labels[i] != OUTLIER_TOPIC:
                continue
            vec = doc_ctfidf_vector(doc.text, self.ctfidf)
            if vec.nnz == 0:
                continue
            sims = sparse_cosine_similarities(self.ctfidf.weights, vec)
            labels[i] = int(np.argmax(sims))
            moved = True
        if not moved:
            return self
        return self._refit_representations(docs, labels)

    def merge_topics(
        self, docs: Sequence[CleanDocument], groups: Sequence[Sequence[int]]
    ) -> "FittedTopicModel":
        """Merge each group of topics into one; ids become contiguous again.

        The new topic order is by the smallest original id of each unit
        (merged group or untouched topic); representations are recomputed
        from the remapped labels.
        """
        K = self.n_topics
        seen: set[int] = set()
        for group in groups:
            if len(group) < 2:
                raise ValueError("each merge group needs at least 2 topics")
            for t in group:
                if not 0 <= t < K:
                    raise ValueError(f"unknown topic id {t}")
                if t in seen:
                    raise ValueError(f"topic {t} appears in more than one group")
                seen.add(t)

        units: list[tuple[int, set[int]]] = []  # (min original id, members)
        grouped = {t for g in groups for t in g}
        for g in groups:
            units.append((min(g), set(g)))
        for t in range(K):
            if t not in grouped:
                units.append((t, {t}))
        units.sort(key=lambda u: u[0])

        old_to_new = {}
        for new_id, (_, members) in enumerate(units):
            for t in members:
                old_to_new[t] = new_id
        labels = np.array(
            [old_to_new[l] if l >= 0 else OUTLIER_TOPIC for l in self.clusters.labels],
            dtype=np.int64,
        )

        def carry(mapping: dict[int, str]) -> dict[int, str]:
            out: dict[int, str] = {}
            if OUTLIER_TOPIC in mapping:
                out[OUTLIER_TOPIC] = mapping[OUTLIER_TOPIC]
            for _, members in units:
                for t in sorted(members):
                    if t in mapping:
                        out[old_to_new[t]] = mapping[t]
                        break
            return out

        merged = self._refit_representations(docs, labels)
        merged.custom_labels = carry(self.custom_labels)
        merged.derived_map = carry(self.derived_map)
        return merged

    def _refit_representations(
        self, docs: Sequence[CleanDocument], labels: np.ndarray
    ) -> "FittedTopicModel":
        embeddings = self.provider.embed_batch([d.text for d in docs])
        if self.config.seed_topics:
            embeddings = apply_seed_topics(
                embeddings, self.config.seed_topics, self.provider, self.config.seed_blend
            )
        reduced = project(self.reducer, embeddings)
        clusters = recompute_geometry(reduced, labels)
        ctfidf = fit_ctfidf(docs, labels.tolist(), self.ctfidf.vocabulary)
        reps = [
            topic_keywords(ctfidf, t, int(clusters.sizes[t]), self.config.top_n_keywords)
            for t in range(clusters.n_topics)
        ]
        rep_docs = _representative_docs(docs, labels, ctfidf)
        return FittedTopicModel(
            config=self.config,
            provider=self.provider,
            reducer=self.reducer,
            clusters=clusters,
            ctfidf=ctfidf,
            representations=reps,
            custom_labels=dict(self.custom_labels),
            derived_map=dict(self.derived_map),
            representative_docs=rep_docs,
        )

    def with_custom_labels(self, labels: dict[int, str]) -> "FittedTopicModel":
        """Attach display labels; clusters and weights stay untouched."""
        for t, label in labels.items():
            if not 0 <= t < self.n_topics:
                raise ValueError(f"unknown topic id {t}")
            if not label:
                raise ValueError("labels must be non-empty")
        merged = dict(self.custom_labels)
        merged.update(labels)
        return replace(self, custom_labels=merged)

    def with_derived_map(self, mapping: dict[int, str]) -> "FittedTopicModel":
        """Attach derived-topic labels (the outlier group -1 may be mapped)."""
        for t, label in mapping.items():
            if t != OUTLIER_TOPIC and not 0 <= t < self.n_topics:
                raise ValueError(f"unknown topic id {t}")
            if not label:
                raise ValueError("derived labels must be non-empty")
        merged = dict(self.derived_map)
        merged.update(mapping)
        return replace(self, derived_map=merged)

    def derived_map_is_total(self) -> bool:
        needed = set(range(self.n_topics)) | {OUTLIER_TOPIC}
        return needed.issubset(self.derived_map.keys())

    # ------------------------------------------------------------------ #
    # Analysis
    # ------------------------------------------------------------------ #

    def hierarchy(self) -> TopicHierarchy:
        """Average-linkage dendrogram over topic representations.

        Distances are cosine distances between class-based TF-IDF rows;
        ties break on the smallest (left, right) node pair.
        """
        K = self.n_topics
        if K < 2:
            raise NoTopicsError("hierarchy needs at least 2 topics")
        rows = self.ctfidf.weights.toarray()
        norms = np.linalg.norm(rows, axis=1)
        norms[norms == 0] = 1.0
        unit = rows / norms[:, None]
        dist = 1.0 - unit @ unit.T
        np.fill_diagonal(dist, np.inf)

        active: dict[int, int] = {t: 1 for t in range(K)}  # node -> leaf count
        D = {(i, j): float(dist[i, j]) for i in range(K) for j in range(i + 1, K)}
        steps: list[MergeStep] = []
        next_id = K
        while len(active) > 1:
            (i, j), d = min(D.items(), key=lambda kv: (kv[1], kv[0]))
            ni, nj = active.pop(i), active.pop(j)
            for k in list(active):
                dik = D.pop((min(i, k), max(i, k)))
                djk = D.pop((min(j, k), max(j, k)))
                D[(min(next_id, k), max(next_id, k))] = (ni * dik + nj * djk) / (ni + nj)
            for key in [key for key in D if i in key or j in key]:
                del D[key]
            steps.append(MergeStep(left=i, right=j, distance=max(d, 0.0), new_id=next_id))
            active[next_id] = ni + nj
            next_id += 1
        return TopicHierarchy(n_leaves=K, steps=tuple(steps))

    def reduce_to_n_topics(
        self, docs: Sequence[CleanDocument], n: int
    ) -> "FittedTopicModel":
        """Cut the dendrogram so n topics remain, then merge accordingly."""
        if n < 1 or n >= self.n_topics:
            return self
        steps = self.hierarchy().steps[: self.n_topics - n]
        members: dict[int, list[int]] = {t: [t] for t in range(self.n_topics)}
        for step in steps:
            members[step.new_id] = members.pop(step.left) + members.pop(step.right)
        groups = [sorted(g) for g in members.values() if len(g) > 1]
        return self.merge_topics(docs, groups) if groups else self

    # ------------------------------------------------------------------ #
    # Experimental multi-topic / long-email strategies
    # ------------------------------------------------------------------ #

    def second_topic(self, assignment: TopicAssignment) -> Optional[SecondTopicSuggestion]:
        """Derived label of the runner-up topic, when it differs.

        Experimental: returns None when the two most probable topics share a
        derived label (a single main concern). Requires probabilities.
        """
        if assignment.probabilities is None:
            raise ValueError("assignment has no probabilities")
        if self.n_topics < 2:
            return None
        order = sorted(
            range(self.n_topics), key=lambda t: (-assignment.probabilities[t], t)
        )
        first, second = order[0], order[1]
        top_label = self.derived_map.get(first, "")
        second_label = self.derived_map.get(second, "")
        if second_label == top_label:
            return None
        return SecondTopicSuggestion(derived_label=second_label)

    def approximate_distribution(
        self, text: str, window: int = 4, stride: int = 1
    ) -> np.ndarray:
        """Sliding-window topic score vector, normalized to sum 1.

        Experimental: each window is scored by cosine between its own
        class-based TF-IDF vector and every topic row; windows sum up.
        """
        if window < 1 or stride < 1:
            raise ValueError("window and stride must be >= 1")
        tokens = text.split()
        if len(tokens) <= window:
            windows = [tokens]
        else:
            windows = [
                tokens[i : i + window] for i in range(0, len(tokens) - window + 1, stride)
            ]
        scores = np.zeros(self.n_topics, dtype=np.float64)
        for win in windows:
            vec = doc_ctfidf_vector(" ".join(win), self.ctfidf)
            if vec.nnz:
                scores += sparse_cosine_similarities(self.ctfidf.weights, vec)
        total = scores.sum()
        if total <= 0:
            return np.full(self.n_topics, 1.0 / self.n_topics)
        return scores / total

    def assign_long_email(self, email_id: str, text: str, strategy: str) -> TopicAssignment:
        """Split a long email into token segments and combine per strategy.

        Experimental. Strategies: majority_derived (most frequent derived
        label wins) or max_probability (most confident segment wins).
        """
        if strategy not in ("majority_derived", "max_probability"):
            raise ValueError(f"unknown strategy {strategy!r}")
        tokens = text.split()
        limit = self.provider.max_tokens
        segments = [
            " ".join(tokens[i : i + limit]) for i in range(0, len(tokens), limit)
        ] or [""]
        assigned = []
        for seg in segments:
            topic, distances, _ = self._assign_text(seg)
            assigned.append((topic, _softmax_neg(distances)))

        if strategy == "majority_derived":
            tally: dict[str, int] = {}
            first_seen: dict[str, int] = {}
            for idx, (topic, _) in enumerate(assigned):
                label = self.derived_map.get(topic, "")
                tally[label] = tally.get(label, 0) + 1
                first_seen.setdefault(label, idx)
            winner = min(tally, key=lambda l: (-tally[l], first_seen[l]))
            topic, probs = assigned[first_seen[winner]]
        else:
            best_idx = max(
                range(len(assigned)), key=lambda i: (assigned[i][1].max(), -i)
            )
            topic, probs = assigned[best_idx]

        return TopicAssignment(
            email_id=email_id,
            model_topic=topic,
            probabilities=probs if self.config.calculate_probabilities else None,
            derived_label=self.derived_map.get(topic, ""),
            truncated=True,
        )


def _representative_docs(
    docs: Sequence[CleanDocument], labels: np.ndarray, ctfidf: CTfIdfModel, top: int = 3
) -> dict[int, list[str]]:
    """Top member documents per topic by similarity to the topic row."""
    by_topic: dict[int, list[tuple[float, str]]] = {}
    for doc, label in zip(docs, labels):
        if label < 0:
            continue
        vec = doc_ctfidf_vector(doc.text, ctfidf)
        sim = (
            float(sparse_cosine_similarities(ctfidf.weights, vec)[label])
            if vec.nnz
            else 0.0
        )
        by_topic.setdefault(int(label), []).append((sim, doc.email_id))
    return {
        t: [eid for _, eid in sorted(pairs, key=lambda p: (-p[0], p[1]))[:top]]
        for t, pairs in by_topic.items()
    }


def fit(
    docs: Sequence[CleanDocument],
    cfg: ModelConfig,
    provider: Optional[EmbeddingProvider] = None,
) -> FittedTopicModel:
    """Fit the full stack: embed, reduce, cluster, represent."""
    provider = provider or make_provider(cfg.embed_provider)
    texts = [d.text for d in docs]
    embeddings = provider.embed_batch(texts)
    if cfg.seed_topics:
        embeddings = apply_seed_topics(
            embeddings, cfg.seed_topics, provider, cfg.seed_blend
        )
    reducer = fit_reducer(embeddings, cfg.reduce_out_dim, cfg.seed)
    reduced = project(reducer, embeddings)
    clusters = cluster(
        reduced,
        ClusterConfig(
            algorithm=cfg.cluster_algorithm,
            min_cluster_size=cfg.min_topic_size,
            k=cfg.kmeans_k,
            seed=cfg.seed,
        ),
    )
    if clusters.n_topics == 0:
        raise NoClassesError("clustering produced no topics (all outliers)")

    stopwords = load_default_stopwords() | frozenset(cfg.extra_stopwords)
    vocab = build_vocabulary(docs, stopwords, cfg.min_df)
    ctfidf = fit_ctfidf(docs, clusters.labels.tolist(), vocab)
    reps = [
        topic_keywords(ctfidf, t, int(clusters.sizes[t]), cfg.top_n_keywords)
        for t in range(clusters.n_topics)
    ]
    model = FittedTopicModel(
        config=cfg,
        provider=provider,
        reducer=reducer,
        clusters=clusters,
        ctfidf=ctfidf,
        representations=reps,
        custom_labels={},
        derived_map={},
        representative_docs=_representative_docs(docs, clusters.labels, ctfidf),
    )
    if cfg.nr_topics is not None and cfg.nr_topics < model.n_topics:
        model = model.reduce_to_n_topics(docs, cfg.nr_topics)
    return model
