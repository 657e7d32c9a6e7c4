"""Email text preparation: transliteration, normalization, stripping, gating.

All functions here are pure and deterministic. The training pipeline applies
them in a fixed order and records the applied steps on every document so the
provenance of a cleaned text is auditable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import Callable, Iterable, Sequence

# Serbian Cyrillic -> Latin, per the official dual-script alphabet.
# The three digraph letters are stored in title case; casing of the second
# character is decided from context at transliteration time.
_CYR_TO_LAT = {
    "А": "A", "а": "a",
    "Б": "B", "б": "b",
    "В": "V", "в": "v",
    "Г": "G", "г": "g",
    "Д": "D", "д": "d",
    "Ђ": "Đ", "ђ": "đ",
    "Е": "E", "е": "e",
    "Ж": "Ž", "ж": "ž",
    "З": "Z", "з": "z",
    "И": "I", "и": "i",
    "Ј": "J", "ј": "j",
    "К": "K", "к": "k",
    "Л": "L", "л": "l",
    "Љ": "Lj", "љ": "lj",
    "М": "M", "м": "m",
    "Н": "N", "н": "n",
    "Њ": "Nj", "њ": "nj",
    "О": "O", "о": "o",
    "П": "P", "п": "p",
    "Р": "R", "р": "r",
    "С": "S", "с": "s",
    "Т": "T", "т": "t",
    "Ћ": "Ć", "ћ": "ć",
    "У": "U", "у": "u",
    "Ф": "F", "ф": "f",
    "Х": "H", "х": "h",
    "Ц": "C", "ц": "c",
    "Ч": "Č", "ч": "č",
    "Џ": "Dž", "џ": "dž",
    "Ш": "Š", "ш": "š",
}

_UPPER_DIGRAPHS = {"Љ": "LJ", "Њ": "NJ", "Џ": "DŽ"}

# Cyrillic codepoint ranges (base block, supplement, extended A/B/C).
_CYRILLIC_RANGES = (
    (0x0400, 0x04FF),
    (0x0500, 0x052F),
    (0x2DE0, 0x2DFF),
    (0xA640, 0xA69F),
    (0x1C80, 0x1C8F),
)


def _is_cyrillic(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CYRILLIC_RANGES)


def transliterate(text: str) -> str:
    """Replace Serbian Cyrillic letters with their Latin counterparts.

    Non-Cyrillic characters pass through unchanged. A capital digraph letter
    (Љ, Њ, Џ) becomes full uppercase (LJ, NJ, DŽ) inside an all-caps run and
    title case (Lj, Nj, Dž) otherwise. Cyrillic codepoints outside the
    Serbian alphabet are dropped so the output never contains Cyrillic.
    """
    out: list[str] = []
    n = len(text)
    for i, ch in enumerate(text):
        mapped = _CYR_TO_LAT.get(ch)
        if mapped is None:
            if _is_cyrillic(ch):
                continue
            out.append(ch)
            continue
        if ch in _UPPER_DIGRAPHS:
            nxt = text[i + 1] if i + 1 < n else ""
            prev = text[i - 1] if i > 0 else ""
            if nxt.isupper() or (not nxt.islower() and prev.isupper()):
                mapped = _UPPER_DIGRAPHS[ch]
        out.append(mapped)
    return "".join(out)


def normalize(text: str) -> str:
    """Lowercase and keep only letters; everything else becomes a space.

    Runs of whitespace collapse to single spaces and the result is stripped,
    so the output alphabet is exactly {letters, single space}.
    """
    lowered = text.lower()
    kept = "".join(ch if ch.isalpha() else " " for ch in lowered)
    return " ".join(kept.split())


def concat_subject_body(subject: str, body: str) -> str:
    """Join subject and body with a single space, tolerating empty parts."""
    if subject and body:
        return f"{subject} {body}"
    return subject or body


def strip_closing(text: str, closing_phrases: Sequence[str]) -> str:
    """Cut the text at the earliest closing phrase, removing it and the rest.

    Expects lowercase input; phrases are matched as plain substrings.
    """
    cut = len(text)
    for phrase in closing_phrases:
        if not phrase:
            continue
        idx = text.find(phrase)
        if idx != -1 and idx < cut:
            cut = idx
    if cut == len(text):
        return text
    return text[:cut].rstrip()


def strip_placeholders(text: str, tags: Sequence[str]) -> str:
    """Remove standalone anonymization tags (case-insensitive, word-bounded)."""
    if not tags:
        return text
    pattern = re.compile(
        r"\b(?:" + "|".join(re.escape(t) for t in tags if t) + r")\b",
        re.IGNORECASE,
    )
    return " ".join(pattern.sub(" ", text).split())


def strip_reply_forward(text: str, reply_markers: Sequence[str]) -> str:
    """Cut the text at the earliest reply/forward marker (case-insensitive)."""
    lowered = text.lower()
    cut = len(text)
    for marker in reply_markers:
        if not marker:
            continue
        idx = lowered.find(marker.lower())
        if idx != -1 and idx < cut:
            cut = idx
    if cut == len(text):
        return text
    return text[:cut].rstrip()


def _load_pack(name: str) -> list[str]:
    path = resources.files("mailtopics.data").joinpath(name)
    return parse_phrase_lines(path.read_text(encoding="utf-8").splitlines())


def parse_phrase_lines(lines: Iterable[str]) -> list[str]:
    """Parse a phrase-pack: one lowercase phrase per line, '#' comments."""
    phrases = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            phrases.append(line.lower())
    return phrases


def load_phrase_file(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return parse_phrase_lines(fh)


@dataclass(frozen=True)
class RawEmail:
    """An email exactly as received (already anonymized upstream)."""

    id: str
    from_addr: str
    to_addrs: tuple[str, ...]
    subject: str
    body: str
    received_at: datetime

    @staticmethod
    def from_dict(d: dict) -> "RawEmail":
        received = d.get("received_at", "1970-01-01T00:00:00+00:00")
        if isinstance(received, str):
            received = datetime.fromisoformat(received.replace("Z", "+00:00"))
        if received.tzinfo is None:
            received = received.replace(tzinfo=timezone.utc)
        return RawEmail(
            id=str(d["id"]),
            from_addr=d.get("from", d.get("from_addr", "")),
            to_addrs=tuple(d.get("to", d.get("to_addrs", []) or [])),
            subject=d.get("subject", "") or "",
            body=d.get("body", "") or "",
            received_at=received,
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "from": self.from_addr,
            "to": list(self.to_addrs),
            "subject": self.subject,
            "body": self.body,
            "received_at": self.received_at.isoformat(),
        }


@dataclass(frozen=True)
class CleanDocument:
    """An email after preprocessing: lowercase letters and single spaces."""

    email_id: str
    text: str
    word_count: int
    token_count: int
    applied_steps: tuple[str, ...]


@dataclass
class PrepConfig:
    """Knobs for the preprocessing pipeline; phrase lists ship as packs."""

    min_words: int = 3
    max_tokens: int = 128
    closing_phrases: list[str] = field(default_factory=lambda: _load_pack("closing_phrases.txt"))
    placeholder_tags: list[str] = field(default_factory=lambda: _load_pack("placeholder_tags.txt"))
    automated_phrases: list[str] = field(default_factory=lambda: _load_pack("automated_phrases.txt"))
    reply_markers: list[str] = field(default_factory=lambda: _load_pack("reply_markers.txt"))

    def __post_init__(self):
        if self.min_words < 0:
            raise ValueError("min_words must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


def whitespace_token_count(text: str) -> int:
    return len(text.split())


_TRAINING_STEPS = (
    "concat_subject_body",
    "transliterate",
    "normalize",
    "strip_closing",
    "strip_placeholders",
)

_INFERENCE_STEPS = (
    "concat_subject_body",
    "strip_reply_forward",
    "transliterate",
    "normalize",
    "strip_closing",
)


def _clean_for_training(email: RawEmail, cfg: PrepConfig) -> str:
    text = concat_subject_body(email.subject, email.body)
    text = transliterate(text)
    text = normalize(text)
    text = strip_closing(text, cfg.closing_phrases)
    text = strip_placeholders(text, cfg.placeholder_tags)
    return text


def preprocess_for_training(
    emails: Sequence[RawEmail],
    cfg: PrepConfig,
    tokenizer: Callable[[str], int] = whitespace_token_count,
) -> tuple[list[CleanDocument], list[tuple[str, str]]]:
    """Clean a training batch and gate out short, duplicate, long, automated.

    Returns (kept, rejected) where rejected holds (email_id, reason) pairs
    with reason one of: too_short, duplicate, too_long, automated. Kept and
    rejected together partition the input; kept preserves input order.
    Duplicates keep the earliest received_at, then the smallest id.
    """
    cleaned: list[tuple[RawEmail, str]] = [(e, _clean_for_training(e, cfg)) for e in emails]

    rejected: list[tuple[str, str]] = []
    survivors: list[tuple[RawEmail, str]] = []
    for email, text in cleaned:
        if len(text.split()) <= cfg.min_words:
            rejected.append((email.id, "too_short"))
        else:
            survivors.append((email, text))

    # Exact-text dedup on cleaned text: winner = min (received_at, id).
    winners: dict[str, RawEmail] = {}
    for email, text in survivors:
        cur = winners.get(text)
        if cur is None or (email.received_at, email.id) < (cur.received_at, cur.id):
            winners[text] = email

    kept: list[CleanDocument] = []
    for email, text in survivors:
        if winners[text].id != email.id:
            rejected.append((email.id, "duplicate"))
            continue
        tokens = tokenizer(text)
        if tokens > cfg.max_tokens:
            rejected.append((email.id, "too_long"))
            continue
        if any(p in text for p in cfg.automated_phrases):
            rejected.append((email.id, "automated"))
            continue
        kept.append(
            CleanDocument(
                email_id=email.id,
                text=text,
                word_count=len(text.split()),
                token_count=tokens,
                applied_steps=_TRAINING_STEPS,
            )
        )
    return kept, rejected


def preprocess_for_inference(
    email: RawEmail,
    cfg: PrepConfig,
    tokenizer: Callable[[str], int] = whitespace_token_count,
) -> CleanDocument:
    """Clean a single incoming email; never rejects, text may come out empty."""
    text = concat_subject_body(email.subject, email.body)
    text = strip_reply_forward(text, cfg.reply_markers)
    text = transliterate(text)
    text = normalize(text)
    text = strip_closing(text, cfg.closing_phrases)
    return CleanDocument(
        email_id=email.id,
        text=text,
        word_count=len(text.split()),
        token_count=tokenizer(text),
        applied_steps=_INFERENCE_STEPS,
    )
