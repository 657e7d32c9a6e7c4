"""Batch email topic detection pipeline.

Preprocess incoming emails, fit an unsupervised topic model over document
embeddings (reduction, density clustering, class-based TF-IDF keywords),
curate raw topics into a small set of derived business topics, assign
topics to new emails in periodic batches, and evaluate speed and
correctness.
"""

from .embed import EmbeddingProvider, ReferenceProvider, RemoteProvider, make_provider
from .evalkit import EvaluationReport, GoldLabel, TimingReport, score, time_batches
from .filters import (
    Disposition,
    DispositionKind,
    LangProfile,
    classify_disposition,
    detect_language,
    is_automated,
    load_default_profiles,
)
from .geometry import (
    ClusterConfig,
    ClusterResult,
    ReducerModel,
    cluster,
    fit_reducer,
    nearest_centroid,
    project,
)
from .model_io import load, save
from .represent import (
    CTfIdfModel,
    TopicRepresentation,
    Vocabulary,
    build_vocabulary,
    doc_ctfidf_vector,
    fit_ctfidf,
    topic_keywords,
)
from .textprep import (
    CleanDocument,
    PrepConfig,
    RawEmail,
    concat_subject_body,
    normalize,
    preprocess_for_inference,
    preprocess_for_training,
    strip_closing,
    strip_placeholders,
    strip_reply_forward,
    transliterate,
)
from .topicmodel import (
    FittedTopicModel,
    ModelConfig,
    TopicAssignment,
    TopicHierarchy,
    fit,
)

__version__ = "0.1.0"

__all__ = [
    "CleanDocument",
    "ClusterConfig",
    "ClusterResult",
    "CTfIdfModel",
    "Disposition",
    "DispositionKind",
    "EmbeddingProvider",
    "EvaluationReport",
    "FittedTopicModel",
    "GoldLabel",
    "LangProfile",
    "ModelConfig",
    "PrepConfig",
    "RawEmail",
    "ReducerModel",
    "ReferenceProvider",
    "RemoteProvider",
    "TimingReport",
    "TopicAssignment",
    "TopicHierarchy",
    "TopicRepresentation",
    "Vocabulary",
    "build_vocabulary",
    "classify_disposition",
    "cluster",
    "concat_subject_body",
    "detect_language",
    "doc_ctfidf_vector",
    "fit",
    "fit_ctfidf",
    "fit_reducer",
    "is_automated",
    "load",
    "load_default_profiles",
    "make_provider",
    "nearest_centroid",
    "normalize",
    "preprocess_for_inference",
    "preprocess_for_training",
    "project",
    "save",
    "score",
    "strip_closing",
    "strip_placeholders",
    "strip_reply_forward",
    "time_batches",
    "topic_keywords",
    "transliterate",
]
