"""Binary persistence of fitted topic models.

Layout: magic "TQM1", u32 format version, then length-prefixed (u64 LE)
sections — manifest (config JSON), reducer, centroids/labels, sparse
weights (CSR triplets), vocabulary, label maps, class statistics — and a
trailing CRC-32 of all preceding bytes. Load refuses unknown versions and
corrupt or truncated files; a round-tripped model transforms identically.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np
from scipy import sparse

from .embed import make_provider
from .errors import ModelFormatError
from .geometry import ClusterResult, ReducerModel
from .represent import CTfIdfModel, TopicRepresentation, Vocabulary
from .topicmodel import FORMAT_VERSION, FittedTopicModel, ModelConfig

MAGIC = b"TQM1"


def _pack_array(arr: np.ndarray) -> bytes:
    data = np.ascontiguousarray(arr)
    header = struct.pack("<BB", data.ndim, 0) + b"".join(
        struct.pack("<q", s) for s in data.shape
    )
    return header + data.astype("<f8" if data.dtype.kind == "f" else "<i8").tobytes()


def _unpack_array(buf: bytes, offset: int, kind: str) -> tuple[np.ndarray, int]:
    ndim, _ = struct.unpack_from("<BB", buf, offset)
    offset += 2
    shape = []
    for _ in range(ndim):
        (s,) = struct.unpack_from("<q", buf, offset)
        shape.append(s)
        offset += 8
    count = int(np.prod(shape)) if shape else 1
    dtype = "<f8" if kind == "f" else "<i8"
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=offset).reshape(shape)
    return arr.copy(), offset + count * 8


def _pack_csr(m: sparse.csr_matrix) -> bytes:
    m = m.tocsr()
    return (
        struct.pack("<qq", *m.shape)
        + _pack_array(m.indptr.astype(np.int64))
        + _pack_array(m.indices.astype(np.int64))
        + _pack_array(m.data.astype(np.float64))
    )


def _unpack_csr(buf: bytes, offset: int) -> tuple[sparse.csr_matrix, int]:
    rows, cols = struct.unpack_from("<qq", buf, offset)
    offset += 16
    indptr, offset = _unpack_array(buf, offset, "i")
    indices, offset = _unpack_array(buf, offset, "i")
    data, offset = _unpack_array(buf, offset, "f")
    return sparse.csr_matrix((data, indices, indptr), shape=(rows, cols)), offset


def _sections(model: FittedTopicModel) -> list[bytes]:
    manifest = json.dumps(
        {"config": model.config.to_dict(), "n_topics": model.n_topics}
    ).encode("utf-8")

    red = model.reducer
    reducer_bin = (
        struct.pack("<q", red.seed)
        + _pack_array(red.mean)
        + _pack_array(red.components)
    )

    cl = model.clusters
    centroids_bin = (
        _pack_array(cl.centroids)
        + _pack_array(cl.labels.astype(np.int64))
        + _pack_array(cl.sizes.astype(np.int64))
    )

    weights_bin = _pack_csr(model.ctfidf.weights)

    vocab = model.ctfidf.vocabulary
    vocab_json = json.dumps(
        {
            "terms": list(vocab.terms),
            "doc_freq": vocab.doc_freq.tolist(),
            "min_df": vocab.min_df,
            "stopwords": sorted(vocab.stopwords),
        }
    ).encode("utf-8")

    maps_json = json.dumps(
        {
            "custom_labels": {str(k): v for k, v in model.custom_labels.items()},
            "derived_map": {str(k): v for k, v in model.derived_map.items()},
            "representative_docs": {
                str(k): v for k, v in model.representative_docs.items()
            },
            "representations": [
                {
                    "topic_id": r.topic_id,
                    "keywords": [[t, w] for t, w in r.keywords],
                    "size": r.size,
                }
                for r in model.representations
            ],
        }
    ).encode("utf-8")

    stats_bin = (
        _pack_csr(model.ctfidf.class_tf)
        + _pack_array(model.ctfidf.corpus_tf.astype(np.float64))
        + struct.pack("<d", model.ctfidf.avg_words_per_class)
    )
    return [manifest, reducer_bin, centroids_bin, weights_bin, vocab_json, maps_json, stats_bin]


def save(model: FittedTopicModel, path) -> None:
    blob = MAGIC + struct.pack("<I", FORMAT_VERSION)
    for section in _sections(model):
        blob += struct.pack("<Q", len(section)) + section
    blob += struct.pack("<I", zlib.crc32(blob))
    Path(path).write_bytes(blob)


def load(path) -> FittedTopicModel:
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise ModelFormatError("not a topic model artifact (bad magic)")
    (stored_crc,) = struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise ModelFormatError("artifact corrupt: checksum mismatch")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported_version: {version}")

    offset = 8
    sections = []
    end = len(blob) - 4
    while offset < end:
        (length,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        if offset + length > end:
            raise ModelFormatError("artifact corrupt: truncated section")
        sections.append(blob[offset : offset + length])
        offset += length
    if len(sections) != 7:
        raise ModelFormatError(f"artifact corrupt: expected 7 sections, got {len(sections)}")

    manifest = json.loads(sections[0])
    config = ModelConfig.from_dict(manifest["config"])

    buf = sections[1]
    (seed,) = struct.unpack_from("<q", buf, 0)
    mean, off = _unpack_array(buf, 8, "f")
    components, _ = _unpack_array(buf, off, "f")
    reducer = ReducerModel(kind="pca", mean=mean, components=components, seed=seed)

    buf = sections[2]
    centroids, off = _unpack_array(buf, 0, "f")
    labels, off = _unpack_array(buf, off, "i")
    sizes, _ = _unpack_array(buf, off, "i")
    clusters = ClusterResult(
        labels=labels, n_topics=centroids.shape[0], centroids=centroids, sizes=sizes
    )

    weights, _ = _unpack_csr(sections[3], 0)

    vj = json.loads(sections[4])
    vocab = Vocabulary(
        terms=tuple(vj["terms"]),
        doc_freq=np.asarray(vj["doc_freq"], dtype=np.int64),
        min_df=vj["min_df"],
        stopwords=frozenset(vj["stopwords"]),
    )

    mj = json.loads(sections[5])
    representations = [
        TopicRepresentation(
            topic_id=r["topic_id"],
            keywords=tuple((t, float(w)) for t, w in r["keywords"]),
            size=r["size"],
        )
        for r in mj["representations"]
    ]

    buf = sections[6]
    class_tf, off = _unpack_csr(buf, 0)
    corpus_tf, off = _unpack_array(buf, off, "f")
    (avg_words,) = struct.unpack_from("<d", buf, off)

    ctfidf = CTfIdfModel(
        weights=weights,
        class_tf=class_tf,
        corpus_tf=corpus_tf,
        avg_words_per_class=avg_words,
        vocabulary=vocab,
    )
    return FittedTopicModel(
        config=config,
        provider=make_provider(config.embed_provider),
        reducer=reducer,
        clusters=clusters,
        ctfidf=ctfidf,
        representations=representations,
        custom_labels={int(k): v for k, v in mj["custom_labels"].items()},
        derived_map={int(k): v for k, v in mj["derived_map"].items()},
        representative_docs={int(k): v for k, v in mj["representative_docs"].items()},
        version=version,
    )
