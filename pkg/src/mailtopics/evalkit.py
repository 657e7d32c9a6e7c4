"""Assignment-correctness scoring and batch-timing harness.

Scoring mirrors the manual review protocol: a gold record may list several
acceptable topics with an optional dominant one. Predictions matching any
acceptable topic count as correct when significance is equal; when one
topic dominates, only that topic counts.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .textprep import RawEmail


@dataclass(frozen=True)
class GoldLabel:
    email_id: str
    topics: frozenset
    dominant: Optional[str] = None

    def __post_init__(self):
        if not self.topics:
            raise ValueError("gold topics must be non-empty")
        if self.dominant is not None and self.dominant not in self.topics:
            raise ValueError("dominant topic must be one of the listed topics")


def load_gold_jsonl(path) -> list[GoldLabel]:
    gold = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            gold.append(
                GoldLabel(
                    email_id=str(d["email_id"]),
                    topics=frozenset(d["topics"]),
                    dominant=d.get("dominant"),
                )
            )
    return gold


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvaluationReport:
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    per_class: dict[str, ClassMetrics]
    confusion: dict[tuple[str, str], int]
    n_items: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "n_items": self.n_items,
            "per_class": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in sorted(self.per_class.items())
            },
        }

    def format_table(self) -> str:
        rows = [
            ("Accuracy", self.accuracy),
            ("Weighted average precision", self.weighted_precision),
            ("Weighted average recall", self.weighted_recall),
            ("Weighted average F1", self.weighted_f1),
        ]
        width = max(len(n) for n, _ in rows)
        lines = [f"{'Metric'.ljust(width)}  Result"]
        lines += [f"{name.ljust(width)}  {value:.4f}" for name, value in rows]
        return "\n".join(lines)


def score(predictions: dict, gold: Sequence[GoldLabel]) -> EvaluationReport:
    """Score predicted derived labels against multi-topic gold records.

    An item is correct when the prediction equals the dominant topic, or —
    for equal-significance items — matches any acceptable topic. For the
    confusion matrix the effective gold class is the dominant topic when
    present, otherwise the prediction itself when acceptable, otherwise the
    lexicographically smallest acceptable topic.
    """
    missing = [g.email_id for g in gold if g.email_id not in predictions]
    if missing:
        raise ValueError(f"missing predictions for: {', '.join(sorted(missing))}")

    confusion: dict[tuple[str, str], int] = {}
    correct = 0
    for g in gold:
        pred = predictions[g.email_id]
        if g.dominant is not None:
            effective = g.dominant
        elif pred in g.topics:
            effective = pred
        else:
            effective = min(g.topics)
        if pred == effective:
            correct += 1
        confusion[(effective, pred)] = confusion.get((effective, pred), 0) + 1

    classes = sorted({c for pair in confusion for c in pair})
    per_class: dict[str, ClassMetrics] = {}
    for c in classes:
        tp = confusion.get((c, c), 0)
        support = sum(n for (g_, _), n in confusion.items() if g_ == c)
        predicted = sum(n for (_, p_), n in confusion.items() if p_ == c)
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[c] = ClassMetrics(precision, recall, f1, support)

    total = len(gold)
    wp = sum(m.precision * m.support for m in per_class.values()) / total
    wr = sum(m.recall * m.support for m in per_class.values()) / total
    wf = sum(m.f1 * m.support for m in per_class.values()) / total
    return EvaluationReport(
        accuracy=correct / total,
        weighted_precision=wp,
        weighted_recall=wr,
        weighted_f1=wf,
        per_class=per_class,
        confusion=confusion,
        n_items=total,
    )


@dataclass
class BatchTiming:
    size: int
    runs: int
    min_seconds_per_email: float
    max_seconds_per_email: float
    mean_seconds_per_email: float


@dataclass
class TimingReport:
    per_size: dict[int, BatchTiming]
    weighted_average_seconds_per_email: float
    total_wall_seconds: float
    total_emails: int

    def to_dict(self) -> dict:
        return {
            "per_size": {
                str(size): {
                    "runs": t.runs,
                    "min_seconds_per_email": t.min_seconds_per_email,
                    "max_seconds_per_email": t.max_seconds_per_email,
                    "mean_seconds_per_email": t.mean_seconds_per_email,
                }
                for size, t in sorted(self.per_size.items())
            },
            "weighted_average_seconds_per_email": self.weighted_average_seconds_per_email,
            "total_wall_seconds": self.total_wall_seconds,
            "total_emails": self.total_emails,
        }


def default_assignment_pipeline(
    model,
    prep_cfg=None,
    profiles=None,
    internal_addrs: Optional[set] = None,
) -> Callable[[RawEmail], object]:
    """Per-email callable covering preprocess, routing, and assignment."""
    from .filters import classify_disposition, load_default_profiles
    from .textprep import PrepConfig, preprocess_for_inference

    prep_cfg = prep_cfg or PrepConfig()
    profiles = profiles if profiles is not None else load_default_profiles()
    internal_addrs = internal_addrs or set()

    def assign(email: RawEmail):
        cleaned = preprocess_for_inference(email, prep_cfg, model.provider.count_tokens)
        disposition = classify_disposition(
            email, cleaned, internal_addrs, prep_cfg, profiles
        )
        if disposition.kind.value == "Process":
            return model.transform(cleaned)
        return disposition

    return assign


def time_model_batches(
    model,
    corpus: Sequence[RawEmail],
    sizes: Sequence[int] = (100, 1000, 10000),
    runs: int = 3,
    **pipeline_kwargs,
) -> TimingReport:
    """Run the timing protocol over a model's full assignment pipeline."""
    assign = default_assignment_pipeline(model, **pipeline_kwargs)
    return time_batches(assign, corpus, sizes=sizes, runs=runs)


def time_batches(
    assign: Callable[[RawEmail], object],
    corpus: Sequence[RawEmail],
    sizes: Sequence[int] = (100, 1000, 10000),
    runs: int = 3,
) -> TimingReport:
    """Time the full assignment pipeline over batches of the given sizes.

    `assign` should run everything a production batch does per email
    (preprocess, route, transform). Each size runs `runs` times; the
    weighted average is total wall time over total processed emails.
    """
    if len(corpus) < max(sizes):
        raise ValueError(f"corpus has {len(corpus)} emails, need {max(sizes)}")
    per_size: dict[int, BatchTiming] = {}
    total_wall = 0.0
    total_emails = 0
    for size in sizes:
        batch = corpus[:size]
        per_email: list[float] = []
        for _ in range(runs):
            t0 = time.perf_counter()
            for email in batch:
                assign(email)
            wall = time.perf_counter() - t0
            per_email.append(wall / size)
            total_wall += wall
            total_emails += size
        per_size[size] = BatchTiming(
            size=size,
            runs=runs,
            min_seconds_per_email=min(per_email),
            max_seconds_per_email=max(per_email),
            mean_seconds_per_email=sum(per_email) / len(per_email),
        )
    return TimingReport(
        per_size=per_size,
        weighted_average_seconds_per_email=total_wall / total_emails,
        total_wall_seconds=total_wall,
        total_emails=total_emails,
    )
