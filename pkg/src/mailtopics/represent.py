"""Vocabulary building and class-based TF-IDF topic representations.

A topic's representation is computed over the concatenation of its member
documents: W[c][t] = tf(t, c) * ln(1 + A / f(t)), where f(t) is the term's
total count across classes and A is the average per-class word count.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np
from scipy import sparse

from .embed import EmbeddingProvider
from .errors import NoClassesError, VocabularyEmptyError
from .textprep import CleanDocument


def load_default_stopwords() -> frozenset:
    path = resources.files("mailtopics.data").joinpath("stopwords_sr.txt")
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line)
    return frozenset(words)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]  # sorted lexicographically
    doc_freq: np.ndarray
    min_df: int
    stopwords: frozenset

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def index_of(self, term: str) -> int | None:
        return self._index.get(term)

    def __len__(self) -> int:
        return len(self.terms)


def build_vocabulary(
    docs: Sequence[CleanDocument], stopwords: frozenset, min_df: int
) -> Vocabulary:
    """Terms present in at least min_df distinct documents, minus stopwords."""
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc.text.split()))
    terms = sorted(t for t, n in df.items() if n >= min_df and t not in stopwords)
    if not terms:
        raise VocabularyEmptyError(
            f"no term appears in >= {min_df} documents after stopword removal"
        )
    freq = np.array([df[t] for t in terms], dtype=np.int64)
    return Vocabulary(terms=tuple(terms), doc_freq=freq, min_df=min_df, stopwords=stopwords)


@dataclass
class CTfIdfModel:
    weights: sparse.csr_matrix  # (K, T): tf * ln(1 + A / f_t)
    class_tf: sparse.csr_matrix  # (K, T) raw counts
    corpus_tf: np.ndarray  # (T,) total counts f_t across classes
    avg_words_per_class: float
    vocabulary: Vocabulary

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def _term_multiplier(corpus_tf: np.ndarray, avg_words: float) -> np.ndarray:
    mult = np.zeros_like(corpus_tf, dtype=np.float64)
    seen = corpus_tf > 0
    mult[seen] = np.log1p(avg_words / corpus_tf[seen])
    return mult


def fit_ctfidf(
    docs: Sequence[CleanDocument], labels: Sequence[int], vocab: Vocabulary
) -> CTfIdfModel:
    """Fit class-based TF-IDF over per-class concatenated documents.

    Label -1 documents are outliers and contribute nothing to class
    statistics.
    """
    if len(docs) != len(labels):
        raise ValueError("docs and labels must align")
    n_classes = max((l for l in labels if l >= 0), default=-1) + 1
    if n_classes == 0:
        raise NoClassesError("every document is an outlier")

    counts = sparse.lil_matrix((n_classes, len(vocab)), dtype=np.float64)
    for doc, label in zip(docs, labels):
        if label < 0:
            continue
        for term, n in Counter(doc.text.split()).items():
            idx = vocab.index_of(term)
            if idx is not None:
                counts[label, idx] += n
    class_tf = counts.tocsr()
    corpus_tf = np.asarray(class_tf.sum(axis=0)).ravel()
    avg_words = float(class_tf.sum()) / n_classes
    mult = _term_multiplier(corpus_tf, avg_words)
    weights = class_tf.multiply(mult[None, :]).tocsr()
    return CTfIdfModel(
        weights=weights,
        class_tf=class_tf,
        corpus_tf=corpus_tf,
        avg_words_per_class=avg_words,
        vocabulary=vocab,
    )


@dataclass(frozen=True)
class TopicRepresentation:
    topic_id: int
    keywords: tuple[tuple[str, float], ...]  # weight desc, ties by term asc
    size: int


def topic_keywords(
    model: CTfIdfModel, topic_id: int, size: int, n: int = 10
) -> TopicRepresentation:
    """Top-n terms of one topic's weight row."""
    if not 0 <= topic_id < model.n_classes:
        raise IndexError(f"topic {topic_id} out of range")
    row = model.weights.getrow(topic_id).toarray().ravel()
    terms = model.vocabulary.terms
    order = sorted(range(len(terms)), key=lambda i: (-row[i], terms[i]))
    top = [(terms[i], float(row[i])) for i in order[:n] if row[i] > 0]
    return TopicRepresentation(topic_id=topic_id, keywords=tuple(top), size=size)


def doc_ctfidf_vector(text: str, model: CTfIdfModel) -> sparse.csr_matrix:
    """Represent one document as its own class under the fitted statistics."""
    vec = sparse.lil_matrix((1, len(model.vocabulary)), dtype=np.float64)
    mult = _term_multiplier(model.corpus_tf, model.avg_words_per_class)
    for term, n in Counter(text.split()).items():
        idx = model.vocabulary.index_of(term)
        if idx is not None:
            vec[0, idx] = n * mult[idx]
    return vec.tocsr()


def sparse_cosine_similarities(matrix: sparse.csr_matrix, row: sparse.csr_matrix) -> np.ndarray:
    """Cosine similarity of one sparse row against each matrix row."""
    row_norm = float(np.sqrt(row.multiply(row).sum()))
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    dots = np.asarray(matrix @ row.T.todense()).ravel()
    sims = np.zeros(matrix.shape[0], dtype=np.float64)
    ok = (norms > 0) & (row_norm > 0)
    sims[ok] = dots[ok] / (norms[ok] * row_norm)
    return sims


def apply_seed_topics(
    doc_embeddings: np.ndarray,
    seeds: Sequence[Sequence[str]],
    provider: EmbeddingProvider,
    blend: float = 0.5,
) -> np.ndarray:
    """Pull each document toward its best-matching seed keyword group.

    Every seed embeds as the mean of its keywords' embeddings. A document
    with a unique best seed becomes normalize(blend * doc + (1 - blend) *
    seed); ambiguous (tied) documents are left alone.
    """
    if not seeds:
        return np.array(doc_embeddings, copy=True)
    if any(not s for s in seeds):
        raise ValueError("seed keyword lists must be non-empty")
    seed_vecs = np.stack(
        [provider.embed_batch(list(kw)).mean(axis=0) for kw in seeds]
    )
    out = np.array(doc_embeddings, dtype=np.float64, copy=True)
    seed_norms = np.linalg.norm(seed_vecs, axis=1)
    for i, doc in enumerate(out):
        dnorm = np.linalg.norm(doc)
        if dnorm == 0:
            continue
        sims = np.zeros(len(seed_vecs))
        ok = seed_norms > 0
        sims[ok] = (seed_vecs[ok] @ doc) / (seed_norms[ok] * dnorm)
        best = int(np.argmax(sims))
        if np.sum(sims == sims[best]) > 1:
            continue
        blended = blend * doc + (1.0 - blend) * seed_vecs[best]
        norm = np.linalg.norm(blended)
        if norm > 0:
            blended /= norm
        out[i] = blended
    return out


def load_seed_topics(path) -> list[list[str]]:
    """Seed keyword groups from a TOML file: [seeds.<name>] keywords = [...]."""
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    groups = data.get("seeds", {})
    return [list(g["keywords"]) for _, g in sorted(groups.items())]
