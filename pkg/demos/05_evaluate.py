"""Evaluate assignment correctness and batch throughput.

Correctness follows the manual-review protocol: gold records may list
several acceptable topics, optionally with one dominant topic that must
match exactly. Timing runs the batch protocol at three sizes.
"""

from mailtopics.evalkit import GoldLabel, score, time_batches
from mailtopics.filters import classify_disposition, load_default_profiles
from mailtopics.synth import (
    DERIVED_LABELS,
    FAMILY_ORDER,
    OUTLIER_LABEL,
    make_blob_corpus,
    make_raw_emails,
)
from mailtopics.textprep import PrepConfig, preprocess_for_inference
from mailtopics.topicmodel import ModelConfig, fit

# --- correctness on a small hand-made gold set ---------------------------
gold = [
    GoldLabel("e1", frozenset({"Internet problemi"})),
    GoldLabel("e2", frozenset({"Računi i fakture"})),
    # two concerns of equal significance: either assignment counts
    GoldLabel("e3", frozenset({"Internet problemi", "Računi i fakture"})),
    # one dominant concern: only that one counts
    GoldLabel(
        "e4",
        frozenset({"Televizija i prijem", "Računi i fakture"}),
        dominant="Televizija i prijem",
    ),
]
predictions = {
    "e1": "Internet problemi",
    "e2": "Računi i fakture",
    "e3": "Računi i fakture",
    "e4": "Računi i fakture",  # acceptable topic, but not the dominant one
}
report = score(predictions, gold)
print(report.format_table())

# --- throughput on the full assignment pipeline --------------------------
docs, _ = make_blob_corpus(n_per_family=400, seed=3)
model = fit(docs, ModelConfig(min_topic_size=50, min_df=5, seed=11))
mapping = {t: DERIVED_LABELS[FAMILY_ORDER[t % 3]] for t in range(model.n_topics)}
mapping[-1] = OUTLIER_LABEL
model = model.with_derived_map(mapping)

emails, _ = make_raw_emails(n=2000, seed=55)
prep_cfg = PrepConfig()
profiles = load_default_profiles()

def assign(email):
    cleaned = preprocess_for_inference(email, prep_cfg, model.provider.count_tokens)
    disp = classify_disposition(email, cleaned, set(), prep_cfg, profiles)
    if disp.kind.value == "Process":
        return model.transform(cleaned)
    return disp

timing = time_batches(assign, emails, sizes=(100, 1000, 2000), runs=3)
print("\nbatch timing (seconds per email):")
for size, t in sorted(timing.per_size.items()):
    print(f"  {size:>5}: {t.min_seconds_per_email:.6f}-{t.max_seconds_per_email:.6f} "
          f"(mean {t.mean_seconds_per_email:.6f})")
print(f"weighted average: {timing.weighted_average_seconds_per_email:.6f} s/email")
