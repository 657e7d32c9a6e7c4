"""Batch workflow: retrieve, route, assign, persist.

One batch job runs at a time; curation operations (merge, labels, derived
map) swap the in-memory model atomically, so requests in flight keep
reading the model they started with.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

from ..errors import MailTopicsError
from ..filters import (
    DISPOSITION_LABELS,
    Disposition,
    DispositionKind,
    LangProfile,
    classify_disposition,
    load_default_profiles,
)
from ..model_io import save
from ..textprep import CleanDocument, PrepConfig, preprocess_for_inference
from ..topicmodel import FittedTopicModel

PROCESS = DispositionKind.PROCESS


@dataclass
class BatchJob:
    id: int
    requested_at: str
    size: int
    counts: dict[str, int]
    wall_time: float

    @property
    def per_email_seconds(self) -> float:
        return self.wall_time / self.size if self.size else 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "requested_at": self.requested_at,
            "size": self.size,
            "counts": self.counts,
            "wall_time": self.wall_time,
            "per_email_seconds": self.per_email_seconds,
        }


@dataclass
class MonthlyReport:
    month: str
    derived_counts: dict[str, int]
    disposition_counts: dict[str, int]

    def label_counts(self) -> dict[str, int]:
        """Derived labels plus the two filtered-email labels, one map."""
        merged = dict(self.derived_counts)
        for kind, n in self.disposition_counts.items():
            if kind != PROCESS.value:
                label = DISPOSITION_LABELS.get(DispositionKind(kind), kind)
                merged[label] = merged.get(label, 0) + n
        return merged

    def to_dict(self) -> dict:
        return {
            "month": self.month,
            "derived_counts": self.derived_counts,
            "disposition_counts": self.disposition_counts,
            "label_counts": self.label_counts(),
        }


def load_clean_docs_jsonl(path) -> list[CleanDocument]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            docs.append(
                CleanDocument(
                    email_id=str(d["email_id"]),
                    text=d["text"],
                    word_count=d.get("word_count", len(d["text"].split())),
                    token_count=d.get("token_count", len(d["text"].split())),
                    applied_steps=tuple(d.get("applied_steps", ())),
                )
            )
    return docs


def dump_clean_docs_jsonl(docs: Sequence[CleanDocument], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(
                json.dumps(
                    {
                        "email_id": d.email_id,
                        "text": d.text,
                        "word_count": d.word_count,
                        "token_count": d.token_count,
                        "applied_steps": list(d.applied_steps),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


class TopicService:
    """Owns the store, the live model, and the training docs for curation."""

    def __init__(
        self,
        store,
        model: Optional[FittedTopicModel],
        prep_cfg: Optional[PrepConfig] = None,
        internal_addrs: Optional[set] = None,
        profiles: Optional[Sequence[LangProfile]] = None,
        training_docs: Optional[Sequence[CleanDocument]] = None,
        model_path=None,
    ):
        self.store = store
        self._model = model
        self.prep_cfg = prep_cfg or PrepConfig()
        self.internal_addrs = internal_addrs or set()
        self.profiles = list(profiles) if profiles is not None else load_default_profiles()
        self.training_docs = list(training_docs) if training_docs else []
        self.model_path = model_path
        self._model_lock = threading.Lock()
        self._job_lock = threading.Lock()
        self._merge_lock = threading.Lock()

    # ------------------------------------------------------------------ #
    # Model access
    # ------------------------------------------------------------------ #

    @property
    def model(self) -> Optional[FittedTopicModel]:
        return self._model

    def _swap_model(self, new_model: FittedTopicModel) -> None:
        with self._model_lock:
            self._model = new_model
        if self.model_path:
            save(new_model, self.model_path)

    # ------------------------------------------------------------------ #
    # Batch processing
    # ------------------------------------------------------------------ #

    def run_batch(self, limit: int) -> BatchJob:
        """Process up to `limit` oldest unprocessed emails.

        Each email ends in exactly one disposition; failures quarantine the
        email and the batch continues. Refuses to run without a model whose
        derived map covers every topic and the outlier group.
        """
        model = self._model
        if model is None:
            raise MailTopicsError("job refused: no model loaded")
        if not model.derived_map_is_total():
            raise MailTopicsError("job refused: derived map does not cover all topics")
        if not self._job_lock.acquire(blocking=False):
            raise MailTopicsError("job refused: another batch is running")
        try:
            requested_at = datetime.now(timezone.utc).isoformat()
            records = self.store.unprocessed(limit)
            counts: dict[str, int] = {}
            t0 = time.perf_counter()
            for rec in records:
                try:
                    email = rec.to_raw()
                    cleaned = preprocess_for_inference(
                        email, self.prep_cfg, model.provider.count_tokens
                    )
                    disp = classify_disposition(
                        email, cleaned, self.internal_addrs, self.prep_cfg, self.profiles
                    )
                    if disp.kind != PROCESS:
                        self.store.mark_processed(
                            rec.id, disp, None, DISPOSITION_LABELS[disp.kind], False
                        )
                    else:
                        assignment = model.transform(cleaned)
                        self.store.mark_processed(
                            rec.id,
                            disp,
                            assignment.model_topic,
                            assignment.derived_label,
                            assignment.truncated,
                        )
                    kind = disp.kind.value
                except Exception as err:  # noqa: BLE001 - quarantine, keep going
                    self.store.mark_processed(
                        rec.id,
                        Disposition(DispositionKind.QUARANTINED, str(err)[:200]),
                        None,
                        DISPOSITION_LABELS[DispositionKind.QUARANTINED],
                        False,
                    )
                    kind = DispositionKind.QUARANTINED.value
                counts[kind] = counts.get(kind, 0) + 1
            wall = time.perf_counter() - t0
            job_id = self.store.record_job(requested_at, len(records), counts, wall)
            return BatchJob(
                id=job_id,
                requested_at=requested_at,
                size=len(records),
                counts=counts,
                wall_time=wall,
            )
        finally:
            self._job_lock.release()

    def monthly_report(self, month: str) -> MonthlyReport:
        derived, dispositions = self.store.counts_for_month(month)
        return MonthlyReport(month=month, derived_counts=derived, disposition_counts=dispositions)

    # ------------------------------------------------------------------ #
    # Curation
    # ------------------------------------------------------------------ #

    def merge_preview(self, groups: Sequence[Sequence[int]]):
        """What-if merge: new representations, nothing committed."""
        if not self.training_docs:
            raise MailTopicsError("merge unavailable: no training corpus loaded")
        return self._model.merge_topics(self.training_docs, groups)

    def merge_commit(self, groups: Sequence[Sequence[int]]) -> FittedTopicModel:
        if not self.training_docs:
            raise MailTopicsError("merge unavailable: no training corpus loaded")
        if not self._merge_lock.acquire(blocking=False):
            raise ConcurrentMergeError("another merge is in progress")
        try:
            merged = self._model.merge_topics(self.training_docs, groups)
            self._swap_model(merged)
            return merged
        finally:
            self._merge_lock.release()

    def set_custom_label(self, topic_id: int, label: str) -> FittedTopicModel:
        updated = self._model.with_custom_labels({topic_id: label})
        self._swap_model(updated)
        return updated

    def set_derived_map(self, mapping: dict[int, str]) -> FittedTopicModel:
        updated = self._model.with_derived_map(mapping)
        self._swap_model(updated)
        return updated


class ConcurrentMergeError(MailTopicsError):
    """A second merge attempted while one is in progress."""


class PeriodicBatchRunner:
    """Fixed-interval batch trigger (manual trigger stays available)."""

    def __init__(self, service: TopicService, limit: int, interval_seconds: float):
        self.service = service
        self.limit = limit
        self.interval = interval_seconds
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        def loop():
            while not self._stop.wait(self.interval):
                try:
                    self.service.run_batch(self.limit)
                except MailTopicsError:
                    pass  # busy or not configured yet; try next tick

        self._thread = threading.Thread(target=loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=self.interval + 1)
