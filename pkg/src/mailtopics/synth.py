"""Synthetic email corpora with known structure, for tests and demos.

Three disjoint keyword families play the role of ground-truth topics:
emails sampled from one family cluster together under the reference
embeddings, so the generator doubles as an oracle for clustering quality.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .textprep import CleanDocument, RawEmail

FAMILIES: dict[str, list[str]] = {
    "internet": [
        "internet", "veza", "ruter", "signal", "spor", "prekida", "brzina",
        "wifi", "mreza", "konekcija", "kabl", "modem", "bezicna", "ping",
        "nestaje", "ucitavanje",
    ],
    "billing": [
        "racun", "faktura", "iznos", "uplata", "dug", "placanje", "opomena",
        "dinara", "cena", "pretplata", "zaduzenje", "obracun", "stavka",
        "uplatnica", "kamata", "storno",
    ],
    "tv": [
        "televizija", "kanal", "slika", "program", "prijemnik", "daljinski",
        "zamrzava", "ekran", "titl", "rezolucija", "antena", "paket",
        "sport", "film", "kocka", "ton",
    ],
}

FAMILY_ORDER = tuple(FAMILIES)

DERIVED_LABELS = {
    "internet": "Internet problemi",
    "billing": "Računi i fakture",
    "tv": "Televizija i prijem",
}

OUTLIER_LABEL = "General problems and malfunctions"


def _family_text(rng: np.random.Generator, family: str, n_words: int) -> str:
    words = rng.choice(FAMILIES[family], size=n_words, replace=True)
    return " ".join(words)


def make_blob_corpus(
    n_per_family: int = 400,
    seed: int = 0,
    noise: int = 0,
    min_words: int = 8,
    max_words: int = 14,
) -> tuple[list[CleanDocument], np.ndarray]:
    """Clean documents from the keyword families, plus optional noise docs.

    Returns (docs, truth) where truth[i] is the family index of doc i and
    -1 marks noise documents (a mix of family words and one-off gibberish
    tokens that density clustering should leave unassigned).
    """
    rng = np.random.default_rng(seed)
    docs: list[CleanDocument] = []
    truth: list[int] = []
    serial = 0
    for fam_idx, family in enumerate(FAMILY_ORDER):
        for _ in range(n_per_family):
            n_words = int(rng.integers(min_words, max_words + 1))
            text = _family_text(rng, family, n_words)
            docs.append(_clean(f"doc-{serial:05d}", text))
            truth.append(fam_idx)
            serial += 1
    for j in range(noise):
        pieces = [str(rng.choice(FAMILIES[f])) for f in FAMILY_ORDER for _ in range(2)]
        pieces += [f"xq{j}z{k}w" for k in range(6)]
        rng.shuffle(pieces)
        docs.append(_clean(f"noise-{j:04d}", " ".join(pieces)))
        truth.append(-1)
    return docs, np.asarray(truth, dtype=np.int64)


def _clean(email_id: str, text: str) -> CleanDocument:
    return CleanDocument(
        email_id=email_id,
        text=text,
        word_count=len(text.split()),
        token_count=len(text.split()),
        applied_steps=("synthetic",),
    )


def make_raw_emails(
    n: int = 1000,
    seed: int = 0,
    internal: int = 0,
    automated: int = 0,
    english: int = 0,
    empty: int = 0,
) -> tuple[list[RawEmail], dict[str, list[str]]]:
    """Raw emails cycling through the families, with planted specials.

    Returns (emails, plants) where plants maps each special kind to the
    planted email ids. Ordinary emails come from customer addresses with a
    family-worded subject and body.
    """
    rng = np.random.default_rng(seed)
    t0 = datetime(2025, 3, 1, 8, 0, 0, tzinfo=timezone.utc)
    emails: list[RawEmail] = []
    plants: dict[str, list[str]] = {
        "internal": [],
        "automated": [],
        "english": [],
        "empty": [],
    }

    specials = (
        ["internal"] * internal + ["automated"] * automated
        + ["english"] * english + ["empty"] * empty
    )
    if len(specials) > n:
        raise ValueError("more plants than emails")
    slots = set(rng.choice(n, size=len(specials), replace=False).tolist()) if specials else set()
    slot_kinds = dict(zip(sorted(slots), specials))

    for i in range(n):
        eid = f"mail-{i:06d}"
        received = t0 + timedelta(minutes=i)
        kind = slot_kinds.get(i)
        if kind == "internal":
            emails.append(
                RawEmail(eid, "podrska@firma.example", ("tim@firma.example",),
                         "interna beleska", "sastanak u tri popodne", received)
            )
        elif kind == "automated":
            emails.append(
                RawEmail(eid, f"kupac{i}@mail.example", ("podrska@firma.example",),
                         "Automatic reply", "I am out of office until monday thank you", received)
            )
        elif kind == "english":
            emails.append(
                RawEmail(eid, f"kupac{i}@mail.example", ("podrska@firma.example",),
                         "Unpaid invoice reminder",
                         "dear sir i am writing about an unpaid invoice from your company "
                         "please settle the outstanding amount this week", received)
            )
        elif kind == "empty":
            emails.append(
                RawEmail(eid, f"kupac{i}@mail.example", ("podrska@firma.example",),
                         "", "-----original message----- stari odgovor ide ovde", received)
            )
        else:
            family = FAMILY_ORDER[i % len(FAMILY_ORDER)]
            subject = _family_text(rng, family, 3)
            body = _family_text(rng, family, int(rng.integers(8, 15)))
            emails.append(
                RawEmail(eid, f"kupac{i}@mail.example", ("podrska@firma.example",),
                         subject, body, received)
            )
        if kind:
            plants[kind].append(eid)
    return emails, plants
