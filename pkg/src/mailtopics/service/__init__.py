"""Batch processing service: store, workflow, and HTTP API."""

from .api import create_app
from .core import (
    BatchJob,
    ConcurrentMergeError,
    MonthlyReport,
    PeriodicBatchRunner,
    TopicService,
    dump_clean_docs_jsonl,
    load_clean_docs_jsonl,
)
from .store import EmailRecord, EmailStore

__all__ = [
    "BatchJob",
    "ConcurrentMergeError",
    "EmailRecord",
    "EmailStore",
    "MonthlyReport",
    "PeriodicBatchRunner",
    "TopicService",
    "create_app",
    "dump_clean_docs_jsonl",
    "load_clean_docs_jsonl",
]
