"""Routing rules that decide which emails skip topic modeling.

Language identification uses ranked character-trigram profiles compared with
the classic out-of-place distance; profiles are compiled once from bundled
seed corpora and are immutable afterwards.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Sequence

from .textprep import CleanDocument, PrepConfig, RawEmail, normalize

PROFILE_SIZE = 500
MIN_TEXT_CHARS = 20
ENGLISH_SPAM_THRESHOLD = 0.65


class DispositionKind(str, Enum):
    PROCESS = "Process"
    INTERNAL = "InternalCorrespondence"
    SPAM_OR_EMPTY = "SpamReplyForwardedOrEmpty"
    QUARANTINED = "Quarantined"


# Labels stored alongside filtered emails, as surfaced to customer service.
DISPOSITION_LABELS = {
    DispositionKind.INTERNAL: "Internal Correspondence",
    DispositionKind.SPAM_OR_EMPTY: "Spam, a reply, forwarded, or empty",
    DispositionKind.QUARANTINED: "Quarantined",
}


@dataclass(frozen=True)
class Disposition:
    kind: DispositionKind
    reason: str = ""

    def __post_init__(self):
        if self.kind == DispositionKind.PROCESS and self.reason:
            raise ValueError("Process disposition carries no reason")
        if self.kind != DispositionKind.PROCESS and not self.reason:
            raise ValueError("non-Process disposition must name its rule")


@dataclass(frozen=True)
class LangProfile:
    """Ranked character-trigram table for one language."""

    lang: str
    ranks: dict  # trigram -> rank, contiguous from 0

    @property
    def size(self) -> int:
        return len(self.ranks)


def _trigrams(text: str) -> Counter:
    padded = f" {normalize(text)} "
    return Counter(padded[i : i + 3] for i in range(len(padded) - 2))


def rank_trigrams(text: str, size: int = PROFILE_SIZE) -> dict:
    """Most frequent trigrams ranked 0..size-1, ties broken alphabetically."""
    counts = _trigrams(text)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return {gram: rank for rank, (gram, _) in enumerate(ordered)}


def build_profile(lang: str, corpus_text: str, size: int = PROFILE_SIZE) -> LangProfile:
    return LangProfile(lang=lang, ranks=rank_trigrams(corpus_text, size))


def load_default_profiles() -> list[LangProfile]:
    """Compile sr and en profiles from the bundled seed corpora."""
    profiles = []
    for lang in ("sr", "en"):
        path = resources.files("mailtopics.data.profiles").joinpath(f"{lang}.txt")
        profiles.append(build_profile(lang, path.read_text(encoding="utf-8")))
    return profiles


def _out_of_place(text_ranks: dict, profile: LangProfile) -> int:
    penalty = profile.size
    total = 0
    for gram, rank in text_ranks.items():
        lang_rank = profile.ranks.get(gram)
        total += penalty if lang_rank is None else abs(rank - lang_rank)
    return total


def detect_language(
    text: str, profiles: Sequence[LangProfile]
) -> tuple[str, float]:
    """Pick the profile with the smallest out-of-place distance.

    Each distance is normalized by its worst case (every trigram maximally
    displaced) to a similarity in [0, 1]; confidence is the best-vs-runner-up
    similarity margin over the best, so it grows monotonically with the
    rank-distance margin. Texts shorter than 20 characters are too thin to
    profile and return ("other", 0.0).
    """
    if len(text) < MIN_TEXT_CHARS:
        return ("other", 0.0)
    text_ranks = rank_trigrams(text)
    if not text_ranks:
        return ("other", 0.0)
    worst = len(text_ranks)
    scored = sorted(
        (
            (1.0 - _out_of_place(text_ranks, p) / (worst * p.size), p.lang)
            for p in profiles
        ),
        key=lambda t: (-t[0], t[1]),
    )
    best_s, best_lang = scored[0]
    if len(scored) == 1:
        return (best_lang, 1.0)
    if best_s <= 0:
        return (best_lang, 0.0)
    runner_s = max(scored[1][0], 0.0)
    return (best_lang, (best_s - runner_s) / best_s)


def is_automated(text: str, automated_phrases: Sequence[str]) -> bool:
    """True iff any automated-mail phrase occurs as a substring."""
    return any(p in text for p in automated_phrases if p)


def classify_disposition(
    email: RawEmail,
    cleaned: CleanDocument,
    internal_addrs: set,
    cfg: PrepConfig,
    profiles: Sequence[LangProfile],
    english_threshold: float = ENGLISH_SPAM_THRESHOLD,
) -> Disposition:
    """Route an email: internal > empty > automated > english > Process."""
    if email.from_addr.lower() in internal_addrs:
        return Disposition(DispositionKind.INTERNAL, "internal_sender")
    if not cleaned.text:
        return Disposition(DispositionKind.SPAM_OR_EMPTY, "empty_after_preprocessing")
    if is_automated(cleaned.text, cfg.automated_phrases):
        return Disposition(DispositionKind.SPAM_OR_EMPTY, "automated_phrase")
    lang, confidence = detect_language(cleaned.text, profiles)
    if lang == "en" and confidence >= english_threshold:
        return Disposition(DispositionKind.SPAM_OR_EMPTY, "english_language")
    return Disposition(DispositionKind.PROCESS)


def load_internal_addresses(path) -> set:
    """One lowercase address per line, '#' comments allowed."""
    addrs = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                addrs.add(line)
    return addrs
