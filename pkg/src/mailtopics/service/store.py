"""Embedded transactional email store (SQLite, one file).

Two tables: emails and batch_jobs. Every per-email status update is its own
transaction so a crashed batch never leaves half-written rows and re-running
a batch cannot double-process an email. JSON-Lines is the interchange format
for export/import.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from ..filters import Disposition, DispositionKind
from ..textprep import RawEmail

_SCHEMA = """
CREATE TABLE IF NOT EXISTS emails (
    id TEXT PRIMARY KEY,
    from_addr TEXT NOT NULL,
    to_addrs TEXT NOT NULL,
    subject TEXT NOT NULL,
    body TEXT NOT NULL,
    received_at TEXT NOT NULL,
    disposition_kind TEXT,
    disposition_reason TEXT,
    model_topic INTEGER,
    derived_label TEXT,
    truncated INTEGER NOT NULL DEFAULT 0,
    processed_at TEXT,
    reviewed INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS idx_emails_unprocessed
    ON emails (processed_at, received_at, id);
CREATE TABLE IF NOT EXISTS batch_jobs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    requested_at TEXT NOT NULL,
    size INTEGER NOT NULL,
    counts TEXT NOT NULL,
    wall_time REAL NOT NULL,
    per_email_seconds REAL NOT NULL
);
"""


@dataclass
class EmailRecord:
    id: str
    from_addr: str
    to_addrs: tuple[str, ...]
    subject: str
    body: str
    received_at: str
    disposition_kind: Optional[str] = None
    disposition_reason: Optional[str] = None
    model_topic: Optional[int] = None
    derived_label: Optional[str] = None
    truncated: bool = False
    processed_at: Optional[str] = None
    reviewed: bool = False

    def to_raw(self) -> RawEmail:
        return RawEmail(
            id=self.id,
            from_addr=self.from_addr,
            to_addrs=self.to_addrs,
            subject=self.subject,
            body=self.body,
            received_at=datetime.fromisoformat(self.received_at),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "from": self.from_addr,
            "to": list(self.to_addrs),
            "subject": self.subject,
            "body": self.body,
            "received_at": self.received_at,
            "disposition_kind": self.disposition_kind,
            "disposition_reason": self.disposition_reason,
            "model_topic": self.model_topic,
            "derived_label": self.derived_label,
            "truncated": self.truncated,
            "processed_at": self.processed_at,
            "reviewed": self.reviewed,
        }


def _row_to_record(row) -> EmailRecord:
    return EmailRecord(
        id=row[0],
        from_addr=row[1],
        to_addrs=tuple(json.loads(row[2])),
        subject=row[3],
        body=row[4],
        received_at=row[5],
        disposition_kind=row[6],
        disposition_reason=row[7],
        model_topic=row[8],
        derived_label=row[9],
        truncated=bool(row[10]),
        processed_at=row[11],
        reviewed=bool(row[12]),
    )


_COLUMNS = (
    "id, from_addr, to_addrs, subject, body, received_at, disposition_kind, "
    "disposition_reason, model_topic, derived_label, truncated, processed_at, reviewed"
)


class EmailStore:
    def __init__(self, path):
        self.path = str(path)
        self._lock = threading.Lock()
        with self._connect() as conn:
            conn.executescript(_SCHEMA)

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path, timeout=30)
        conn.execute("PRAGMA foreign_keys = ON")
        return conn

    # ------------------------------------------------------------------ #
    # Ingestion
    # ------------------------------------------------------------------ #

    def ingest(self, emails: Sequence[RawEmail]) -> int:
        """Insert new emails; re-ingesting an existing id is a no-op.

        The whole batch commits in one transaction: either all new rows
        become visible or none do.
        """
        inserted = 0
        with self._lock, self._connect() as conn:
            for e in emails:
                if not e.id:
                    raise ValueError("email id must be non-empty")
                cur = conn.execute(
                    "INSERT OR IGNORE INTO emails "
                    "(id, from_addr, to_addrs, subject, body, received_at) "
                    "VALUES (?, ?, ?, ?, ?, ?)",
                    (
                        e.id,
                        e.from_addr,
                        json.dumps(list(e.to_addrs)),
                        e.subject,
                        e.body,
                        e.received_at.isoformat(),
                    ),
                )
                inserted += cur.rowcount
        return inserted

    # ------------------------------------------------------------------ #
    # Batch processing
    # ------------------------------------------------------------------ #

    def unprocessed(self, limit: int) -> list[EmailRecord]:
        with self._connect() as conn:
            rows = conn.execute(
                f"SELECT {_COLUMNS} FROM emails WHERE processed_at IS NULL "
                "ORDER BY received_at, id LIMIT ?",
                (limit,),
            ).fetchall()
        return [_row_to_record(r) for r in rows]

    def mark_processed(
        self,
        email_id: str,
        disposition: Disposition,
        model_topic: Optional[int],
        derived_label: Optional[str],
        truncated: bool,
    ) -> None:
        """Atomically store the outcome for one email (single transaction)."""
        now = datetime.now(timezone.utc).isoformat()
        with self._lock, self._connect() as conn:
            conn.execute(
                "UPDATE emails SET disposition_kind=?, disposition_reason=?, "
                "model_topic=?, derived_label=?, truncated=?, processed_at=? "
                "WHERE id=? AND processed_at IS NULL",
                (
                    disposition.kind.value,
                    disposition.reason,
                    model_topic,
                    derived_label,
                    int(truncated),
                    now,
                    email_id,
                ),
            )

    # ------------------------------------------------------------------ #
    # Queries
    # ------------------------------------------------------------------ #

    def get(self, email_id: str) -> Optional[EmailRecord]:
        with self._connect() as conn:
            row = conn.execute(
                f"SELECT {_COLUMNS} FROM emails WHERE id=?", (email_id,)
            ).fetchone()
        return _row_to_record(row) if row else None

    def query(
        self,
        derived_label: Optional[str] = None,
        disposition: Optional[str] = None,
        reviewed: Optional[bool] = None,
        page: int = 1,
        page_size: int = 50,
    ) -> tuple[list[EmailRecord], int]:
        clauses, params = [], []
        if derived_label is not None:
            clauses.append("derived_label = ?")
            params.append(derived_label)
        if disposition is not None:
            clauses.append("disposition_kind = ?")
            params.append(disposition)
        if reviewed is not None:
            clauses.append("reviewed = ?")
            params.append(int(reviewed))
        where = ("WHERE " + " AND ".join(clauses)) if clauses else ""
        with self._connect() as conn:
            total = conn.execute(
                f"SELECT COUNT(*) FROM emails {where}", params
            ).fetchone()[0]
            rows = conn.execute(
                f"SELECT {_COLUMNS} FROM emails {where} "
                "ORDER BY received_at, id LIMIT ? OFFSET ?",
                params + [page_size, (page - 1) * page_size],
            ).fetchall()
        return [_row_to_record(r) for r in rows], total

    def set_reviewed(self, email_id: str, reviewed: bool) -> bool:
        with self._lock, self._connect() as conn:
            cur = conn.execute(
                "UPDATE emails SET reviewed=? WHERE id=?", (int(reviewed), email_id)
            )
            return cur.rowcount > 0

    def counts_for_month(self, month: str) -> tuple[dict, dict]:
        """(derived-label counts of processed rows, disposition counts)."""
        like = f"{month}-%"
        derived: dict[str, int] = {}
        dispositions: dict[str, int] = {}
        with self._connect() as conn:
            for label, n in conn.execute(
                "SELECT derived_label, COUNT(*) FROM emails "
                "WHERE processed_at IS NOT NULL AND received_at LIKE ? "
                "AND disposition_kind = ? GROUP BY derived_label",
                (like, DispositionKind.PROCESS.value),
            ):
                derived[label or ""] = n
            for kind, n in conn.execute(
                "SELECT disposition_kind, COUNT(*) FROM emails "
                "WHERE processed_at IS NOT NULL AND received_at LIKE ? "
                "GROUP BY disposition_kind",
                (like,),
            ):
                dispositions[kind] = n
        return derived, dispositions

    # ------------------------------------------------------------------ #
    # Jobs
    # ------------------------------------------------------------------ #

    def record_job(
        self, requested_at: str, size: int, counts: dict, wall_time: float
    ) -> int:
        per_email = wall_time / size if size else 0.0
        with self._lock, self._connect() as conn:
            cur = conn.execute(
                "INSERT INTO batch_jobs (requested_at, size, counts, wall_time, "
                "per_email_seconds) VALUES (?, ?, ?, ?, ?)",
                (requested_at, size, json.dumps(counts), wall_time, per_email),
            )
            return int(cur.lastrowid)

    def list_jobs(self, limit: int = 20) -> list[dict]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT id, requested_at, size, counts, wall_time, per_email_seconds "
                "FROM batch_jobs ORDER BY id DESC LIMIT ?",
                (limit,),
            ).fetchall()
        return [
            {
                "id": r[0],
                "requested_at": r[1],
                "size": r[2],
                "counts": json.loads(r[3]),
                "wall_time": r[4],
                "per_email_seconds": r[5],
            }
            for r in rows
        ]

    # ------------------------------------------------------------------ #
    # Interchange
    # ------------------------------------------------------------------ #

    def export_jsonl(self, path) -> int:
        records, _ = self.query(page_size=10**9)
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
        return len(records)

    def import_jsonl(self, path) -> int:
        emails = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    emails.append(RawEmail.from_dict(json.loads(line)))
        return self.ingest(emails)
