"""The production workflow: store, periodic batches, monthly reports.

Emails land in the store as they arrive; a batch job routes each one
(internal correspondence and spam/reply/empty are filtered out, the rest
get a topic), and everything is queryable afterwards.
"""

import tempfile
from pathlib import Path

from mailtopics.service import EmailStore, TopicService
from mailtopics.synth import (
    DERIVED_LABELS,
    FAMILY_ORDER,
    OUTLIER_LABEL,
    make_blob_corpus,
    make_raw_emails,
)
from mailtopics.textprep import PrepConfig
from mailtopics.topicmodel import ModelConfig, fit

# Fit and curate a model first (normally done once, offline).
docs, truth = make_blob_corpus(n_per_family=400, seed=3)
model = fit(docs, ModelConfig(min_topic_size=50, min_df=5, seed=11))
mapping = {t: DERIVED_LABELS[FAMILY_ORDER[t % 3]] for t in range(model.n_topics)}
mapping[-1] = OUTLIER_LABEL
model = model.with_derived_map(mapping)

with tempfile.TemporaryDirectory() as tmp:
    store = EmailStore(Path(tmp) / "emails.db")
    service = TopicService(
        store=store,
        model=model,
        prep_cfg=PrepConfig(),
        internal_addrs={"podrska@firma.example"},
        training_docs=docs,
    )

    emails, plants = make_raw_emails(
        n=500, seed=7, internal=12, automated=8, english=6, empty=4
    )
    print("ingested:", store.ingest(emails))
    print("re-ingest is a no-op:", store.ingest(emails))

    job = service.run_batch(limit=1000)
    print(f"\nbatch {job.id}: {job.size} emails in {job.wall_time:.2f}s "
          f"({job.per_email_seconds * 1000:.2f} ms/email)")
    for kind, n in sorted(job.counts.items()):
        print(f"  {kind}: {n}")

    report = service.monthly_report("2025-03")
    print("\nmonthly report 2025-03:")
    for label, n in sorted(report.label_counts().items()):
        print(f"  {label}: {n}")

    internal = store.query(disposition="InternalCorrespondence")[1]
    print(f"\ninternal correspondence on file: {internal} "
          f"(planted {len(plants['internal'])})")

print("\nHTTP API: mailtopics serve --store emails.db --model model.tqm "
      "--docs clean.jsonl --port 8000")
