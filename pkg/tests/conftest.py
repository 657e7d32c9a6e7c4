import collections

import pytest

from mailtopics.synth import DERIVED_LABELS, FAMILY_ORDER, OUTLIER_LABEL, make_blob_corpus
from mailtopics.topicmodel import ModelConfig, fit


@pytest.fixture(scope="session")
def blob_corpus():
    """3 keyword families x 400 docs plus 20 mixed-vocabulary noise docs."""
    return make_blob_corpus(n_per_family=400, seed=3, noise=20)


@pytest.fixture(scope="session")
def blob_model(blob_corpus):
    docs, _ = blob_corpus
    cfg = ModelConfig(
        min_topic_size=50, min_df=5, seed=11, calculate_probabilities=True
    )
    return fit(docs, cfg)


def topic_family_map(truth, labels, n_topics):
    """Majority ground-truth family for each discovered topic."""
    mapping = {}
    for t in range(n_topics):
        fams = [f for f, l in zip(truth, labels) if l == t and f >= 0]
        mapping[t] = collections.Counter(fams).most_common(1)[0][0]
    return mapping


@pytest.fixture(scope="session")
def labeled_blob_model(blob_corpus, blob_model):
    """Blob model with a total derived map aligned to the true families."""
    _, truth = blob_corpus
    fam_of = topic_family_map(truth, blob_model.clusters.labels, blob_model.n_topics)
    mapping = {
        t: DERIVED_LABELS[FAMILY_ORDER[fam]] for t, fam in fam_of.items()
    }
    mapping[-1] = OUTLIER_LABEL
    return blob_model.with_derived_map(mapping)
