"""Human-in-the-loop curation: hierarchy, merging, labels, derived topics.

Raw unsupervised topics are too many for customer service; curation maps
them onto a small set of business labels without touching the clusters.
"""

import tempfile
from pathlib import Path

from mailtopics.model_io import load, save
from mailtopics.synth import make_blob_corpus
from mailtopics.topicmodel import ModelConfig, fit

docs, _ = make_blob_corpus(n_per_family=400, seed=3)

# k-means with a deliberately large k stands in for the "too many raw
# topics" situation a real corpus produces.
cfg = ModelConfig(min_topic_size=2, min_df=5, seed=4, cluster_algorithm="kmeans", kmeans_k=12)
model = fit(docs, cfg)
print(f"raw model: {model.n_topics} topics")

# The dendrogram suggests which topics belong together.
tree = model.hierarchy()
print("\nfirst merges suggested by the hierarchy:")
for step in tree.steps[:4]:
    print(f"  {step.left} + {step.right} at cosine distance {step.distance:.3f}")

# Merge the closest pair and re-check.
first = tree.steps[0]
merged = model.merge_topics(docs, [[l for l in (first.left, first.right)]])
print(f"\nafter merging {first.left}+{first.right}: {merged.n_topics} topics")

# Custom labels + derived map: pure bookkeeping, clusters stay intact.
labeled = merged.with_custom_labels({0: "Računi i fakture"})
mapping = {t: ("Internet problemi" if t % 2 else "Računi i fakture")
           for t in range(labeled.n_topics)}
mapping[-1] = "General problems and malfunctions"
final = labeled.with_derived_map(mapping)
print("derived map total:", final.derived_map_is_total())

# Persist and reload; assignments survive the round trip bit-for-bit.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.tqm"
    save(final, path)
    reloaded = load(path)
    a = final.transform(docs[0])
    b = reloaded.transform(docs[0])
    print(f"round trip: topic {a.model_topic} == {b.model_topic}, "
          f"label {b.derived_label!r}")
