"""Fit a topic model on a synthetic corpus and inspect what it found.

The synthetic generator plants three keyword families (internet, billing,
tv), so we know the right answer: three topics whose keywords come from
one family each, plus a handful of mixed-vocabulary outliers.
"""

from mailtopics.synth import make_blob_corpus
from mailtopics.topicmodel import ModelConfig, fit

docs, truth = make_blob_corpus(n_per_family=400, seed=3, noise=20)
print(f"corpus: {len(docs)} documents, {int((truth == -1).sum())} noise docs")

cfg = ModelConfig(min_topic_size=50, min_df=5, seed=11)
model = fit(docs, cfg)
print(f"\nfitted {model.n_topics} topics, {model.clusters.outlier_count()} outliers")

for rep in model.representations:
    keywords = ", ".join(term for term, _ in rep.keywords[:6])
    print(f"  topic {rep.topic_id} ({rep.size} docs): {keywords}")

print("\nrepresentative documents of topic 0:")
texts = {d.email_id: d.text for d in docs}
for eid in model.representative_docs[0]:
    print("  -", texts[eid])

# Outlier reduction: reassign -1 docs to their best c-TF-IDF match.
reduced = model.reduce_outliers(docs)
print(
    f"\noutliers after reduction: {model.clusters.outlier_count()} "
    f"-> {reduced.clusters.outlier_count()}"
)

# Assign a brand-new email.
from mailtopics.textprep import CleanDocument

new = CleanDocument("new-1", "racun faktura pogresan iznos opomena", 5, 5, ())
assignment = reduced.transform(new)
print(f"\nnew email lands in topic {assignment.model_topic}: "
      + ", ".join(t for t, _ in reduced.representations[assignment.model_topic].keywords[:5]))
