"""Acceptance suite: one test per criterion, one PASS line per criterion.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines; a missing PASS line means that criterion failed.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from mailtopics.evalkit import GoldLabel, load_gold_jsonl, score, time_model_batches
from mailtopics.model_io import load, save
from mailtopics.represent import build_vocabulary, fit_ctfidf
from mailtopics.service import EmailStore, TopicService
from mailtopics.synth import (
    DERIVED_LABELS,
    FAMILY_ORDER,
    OUTLIER_LABEL,
    make_blob_corpus,
    make_raw_emails,
)
from mailtopics.textprep import (
    CleanDocument,
    PrepConfig,
    RawEmail,
    preprocess_for_training,
    transliterate,
)
from mailtopics.topicmodel import ModelConfig, fit

from conftest import topic_family_map
from oracles import brute_force_ctfidf, brute_force_metrics
from test_textprep import ALPHABET

DATA = Path(__file__).parent / "data"


def ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


class TestAcceptance:
    def test_transliteration_table_and_idempotence(self):
        t0 = time.perf_counter()
        for cyr, lat in ALPHABET:
            assert transliterate(cyr) == lat
            assert transliterate(cyr.lower()) == lat.lower()

        rng = np.random.default_rng(2024)
        cyrillic = "".join(c for c, _ in ALPHABET)
        pool = list(cyrillic + cyrillic.lower() + "abcčćđšžž ABC .,;1234🙂")
        for _ in range(1000):
            s = "".join(rng.choice(pool, size=rng.integers(0, 60)))
            once = transliterate(s)
            assert transliterate(once) == once
            assert not any(0x0400 <= ord(ch) <= 0x052F for ch in once)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0, f"transliteration suite took {elapsed:.2f}s"
        ok("transliteration alphabet + idempotence (<1s)")

    def test_preprocessing_partition(self):
        base, _ = make_raw_emails(n=480, seed=41)
        planted = {
            "short": [], "duplicate": [], "long": [], "automated": [],
        }

        def plant(i, subject, body):
            return RawEmail(
                id=f"plant-{i}", from_addr="kupac@mail.example", to_addrs=(),
                subject=subject, body=body, received_at=base[0].received_at,
            )

        extras = []
        for i in range(5):
            e = plant(f"short-{i}", "", "samo tri reci")
            planted["short"].append(e.id)
            extras.append(e)
        dup_source = base[10]
        for i in range(5):
            e = RawEmail(
                id=f"dup-{i}", from_addr="x@y.z", to_addrs=(),
                subject=dup_source.subject, body=dup_source.body,
                received_at=dup_source.received_at.replace(minute=59),
            )
            planted["duplicate"].append(e.id)
            extras.append(e)
        # digits are stripped by normalization, so uniqueness must be alphabetic
        for i in range(5):
            tag = chr(ord("a") + i)
            words = " ".join(f"duga{tag}rec{chr(97 + j % 26)}{chr(97 + j // 26)}" for j in range(200))
            e = plant(f"long-{i}", "", words)
            planted["long"].append(e.id)
            extras.append(e)
        for i in range(5):
            tag = chr(ord("a") + i)
            e = plant(
                f"auto-{i}", "odmor",
                f"obavestenje {tag} automatski odgovor do ponedeljka hvala svima",
            )
            planted["automated"].append(e.id)
            extras.append(e)

        corpus = base + extras
        assert len(corpus) == 500
        kept, rejected = preprocess_for_training(corpus, PrepConfig())
        assert len(kept) + len(rejected) == len(corpus)
        reasons = dict(rejected)
        for eid in planted["short"]:
            assert reasons[eid] == "too_short", (eid, reasons.get(eid))
        for eid in planted["duplicate"]:
            assert reasons[eid] == "duplicate"
        for eid in planted["long"]:
            assert reasons[eid] == "too_long"
        for eid in planted["automated"]:
            assert reasons[eid] == "automated"
        ok("preprocessing partition (500 emails, planted buckets exact)")

    def test_ctfidf_oracle_equivalence(self):
        def doc(eid, text):
            return CleanDocument(eid, text, len(text.split()), len(text.split()), ())

        # Hand example: W[c1][internet] = 2 * ln(2.75)
        docs = [doc("a", "internet ne radi"), doc("b", "internet spor"), doc("c", "racun pogresan")]
        vocab = build_vocabulary(docs, frozenset(), min_df=1)
        model = fit_ctfidf(docs, [0, 0, 1], vocab)
        idx = vocab.index_of("internet")
        assert abs(model.weights[0, idx] - 2 * math.log(2.75)) < 1e-9

        rng = np.random.default_rng(77)
        for trial in range(50):
            n_docs = int(rng.integers(3, 51))
            pool = [f"w{i}" for i in range(int(rng.integers(4, 101)))]
            docs, labels = [], []
            for i in range(n_docs):
                words = rng.choice(pool, size=rng.integers(1, 15))
                docs.append(doc(f"d{i}", " ".join(words)))
                labels.append(int(rng.integers(-1, 4)))
            if all(l < 0 for l in labels):
                labels[0] = 0
            vocab = build_vocabulary(docs, frozenset(), min_df=1)
            fitted = fit_ctfidf(docs, labels, vocab)
            expected = brute_force_ctfidf([d.text for d in docs], labels, list(vocab.terms))
            assert np.allclose(fitted.weights.toarray(), np.asarray(expected), atol=1e-9)
        ok("c-TF-IDF equals brute-force oracle on 50 corpora (1e-9) + hand value")

    def test_clustering_recovery_and_determinism(self, blob_corpus):
        t0 = time.perf_counter()
        docs, truth = blob_corpus
        cfg = ModelConfig(min_topic_size=50, min_df=5, seed=11)
        runs = [fit(docs, cfg) for _ in range(3)]
        model = runs[0]
        assert model.n_topics == 3
        labels = model.clusters.labels
        pure = assigned = 0
        for t in range(3):
            fams = [f for f, l in zip(truth, labels) if l == t and f >= 0]
            pure += max(np.bincount(fams))
            assigned += len(fams)
        assert pure / assigned >= 0.9
        for other in runs[1:]:
            assert np.array_equal(other.clusters.labels, labels)
            assert np.array_equal(
                other.ctfidf.weights.toarray(), model.ctfidf.weights.toarray()
            )
        elapsed = time.perf_counter() - t0
        assert elapsed < 60, f"clustering runs took {elapsed:.1f}s"
        ok("clustering recovery K=3, purity >= 0.9, 3 bit-equal runs (<60s)")

    def test_outlier_reduction_monotone(self, blob_corpus, blob_model):
        docs, _ = blob_corpus
        before_labels = blob_model.clusters.labels
        before = blob_model.clusters.outlier_count()
        assert before > 0
        reduced = blob_model.reduce_outliers(docs)
        after = reduced.clusters.outlier_count()
        assert after < before
        mask = before_labels >= 0
        assert np.array_equal(reduced.clusters.labels[mask], before_labels[mask])
        ok(f"outlier reduction strictly decreases ({before} -> {after}), labels intact")

    def test_merge_and_label_semantics(self, blob_corpus):
        docs, _ = blob_corpus
        cfg = ModelConfig(
            min_topic_size=2, min_df=5, seed=4,
            cluster_algorithm="kmeans", kmeans_k=14,
        )
        model = fit(docs, cfg)
        assert model.n_topics == 14

        group = [12, 10, 4, 8, 6, 3, 13, 11, 9, 5, 7, 2, 1]  # 13 topics -> 1
        merged = model.merge_topics(docs, [group])
        assert merged.n_topics == model.n_topics - (len(group) - 1)
        assert int(merged.clusters.sizes.sum()) + merged.clusters.outlier_count() == len(docs)

        w_before = merged.ctfidf.weights.toarray().copy()
        c_before = merged.clusters.centroids.copy()
        l_before = merged.clusters.labels.copy()
        labeled = merged.with_custom_labels({0: "Računi i fakture"})
        mapped = labeled.with_derived_map(
            {0: "Računi i fakture", 1: "Ostalo", -1: "General problems and malfunctions"}
        )
        assert np.array_equal(mapped.ctfidf.weights.toarray(), w_before)
        assert np.array_equal(mapped.clusters.centroids, c_before)
        assert np.array_equal(mapped.clusters.labels, l_before)
        ok("merge reduces K by |group|-1, conserves docs; labels leave math bit-equal")

    def test_metrics_fixture_and_oracle(self):
        golds = load_gold_jsonl(DATA / "table2_gold.jsonl")
        preds = {}
        with open(DATA / "table2_pred.jsonl", encoding="utf-8") as fh:
            for line in fh:
                d = json.loads(line)
                preds[d["email_id"]] = d["derived_label"]
        report = score(preds, golds)
        assert round(report.accuracy, 4) == 0.9600
        assert round(report.weighted_precision, 4) == 0.9645
        assert round(report.weighted_recall, 4) == 0.9600
        assert round(report.weighted_f1, 4) == 0.9599

        rng = np.random.default_rng(99)
        classes = [f"C{i}" for i in range(8)]
        for _ in range(100):
            n = int(rng.integers(4, 120))
            rows, rand_preds = [], {}
            for i in range(n):
                k = int(rng.integers(1, 4))
                topics = set(rng.choice(classes, size=k, replace=False).tolist())
                dominant = (
                    sorted(topics)[int(rng.integers(len(topics)))]
                    if rng.random() < 0.5 else None
                )
                rows.append((f"e{i}", topics, dominant))
                rand_preds[f"e{i}"] = str(rng.choice(classes))
            got = score(rand_preds, [GoldLabel(e, frozenset(t), d) for e, t, d in rows])
            acc, wp, wr, wf = brute_force_metrics(rows, rand_preds)
            assert abs(got.accuracy - acc) < 1e-12
            assert abs(got.weighted_precision - wp) < 1e-12
            assert abs(got.weighted_recall - wr) < 1e-12
            assert abs(got.weighted_f1 - wf) < 1e-12
        ok("Table-2 fixture exact (0.9600/0.9645/0.9600/0.9599) + oracle on 100 instances")

    def test_timing_harness_protocol(self, labeled_blob_model):
        model = labeled_blob_model
        emails, _ = make_raw_emails(n=10000, seed=55)
        report = time_model_batches(model, emails, sizes=(100, 1000, 10000), runs=3)
        total_wall = sum(
            t.mean_seconds_per_email * size * t.runs
            for size, t in report.per_size.items()
        )
        assert report.weighted_average_seconds_per_email == pytest.approx(
            report.total_wall_seconds / report.total_emails, abs=0
        )
        assert report.total_emails == 3 * (100 + 1000 + 10000)
        assert total_wall == pytest.approx(report.total_wall_seconds, rel=1e-9)
        mean_1000 = report.per_size[1000].mean_seconds_per_email
        assert mean_1000 <= 0.1, f"{mean_1000:.4f} s/email at batch 1000"
        ok(
            "timing protocol 100/1000/10000 x 3: identity exact, "
            f"{mean_1000 * 1000:.2f} ms/email at batch 1000 (<=100ms)"
        )

    def test_service_round_trip(self, tmp_path, blob_corpus, labeled_blob_model):
        docs, _ = blob_corpus
        store = EmailStore(tmp_path / "emails.db")
        service = TopicService(
            store=store,
            model=labeled_blob_model,
            prep_cfg=PrepConfig(),
            internal_addrs={"podrska@firma.example"},
            training_docs=docs,
        )
        emails, plants = make_raw_emails(
            n=1000, seed=61, internal=20, automated=15, english=10, empty=10
        )
        assert store.ingest(emails) == 1000

        # crash mid-batch, then re-run to completion
        real_transform = labeled_blob_model.transform
        calls = {"n": 0}

        def flaky(cleaned):
            calls["n"] += 1
            if calls["n"] > 100:
                raise KeyboardInterrupt("simulated crash")
            return real_transform(cleaned)

        labeled_blob_model.transform = flaky
        try:
            service.run_batch(limit=1000)
        except KeyboardInterrupt:
            pass
        finally:
            labeled_blob_model.transform = real_transform

        first_pass = {
            r.id: r.processed_at for r in store.query(page_size=2000)[0] if r.processed_at
        }
        assert 0 < len(first_pass) < 1000
        job = service.run_batch(limit=1000)
        records, total = store.query(page_size=2000)
        assert total == 1000
        assert all(r.processed_at for r in records)
        for r in records:
            if r.id in first_pass:
                assert r.processed_at == first_pass[r.id], "email processed twice"

        for eid in plants["internal"]:
            assert store.get(eid).derived_label == "Internal Correspondence"
        for kind in ("automated", "english", "empty"):
            for eid in plants[kind]:
                assert store.get(eid).derived_label == "Spam, a reply, forwarded, or empty"
        assigned = [
            r for r in records if r.disposition_kind == "Process"
        ]
        assert all(r.model_topic is not None and r.derived_label for r in assigned)
        kinds_per_record = [
            sum(
                [
                    r.disposition_kind == "Process" and r.model_topic is not None,
                    r.disposition_kind == "InternalCorrespondence",
                    r.disposition_kind == "SpamReplyForwardedOrEmpty",
                    r.disposition_kind == "Quarantined",
                ]
            )
            for r in records
        ]
        assert all(k == 1 for k in kinds_per_record)

        # save/load round-trip gives identical assignments on 100 docs
        path = tmp_path / "model.tqm"
        save(labeled_blob_model, path)
        loaded = load(path)
        for d in docs[:100]:
            a, b = labeled_blob_model.transform(d), loaded.transform(d)
            assert (a.model_topic, a.derived_label) == (b.model_topic, b.derived_label)
        ok("service round-trip: 1000 emails, crash-safe re-run, plants labeled, save/load identical")
