"""Walk through the email cleaning pipeline step by step.

Shows what each transformation does to a realistic message and how the
training-time gates (short / duplicate / long / automated) partition a
batch.
"""

from datetime import datetime, timezone

from mailtopics import (
    PrepConfig,
    RawEmail,
    normalize,
    preprocess_for_inference,
    preprocess_for_training,
    strip_closing,
    transliterate,
)

cfg = PrepConfig()

# --- the seven-step surgery, one step at a time -------------------------
raw = "Поштовани, рачун за јул ми је дуплиран!!! Срдачан поздрав, Ана"
print("raw:          ", raw)

latin = transliterate(raw)
print("transliterate:", latin)

lowered = normalize(latin)
print("normalize:    ", lowered)

no_signature = strip_closing(lowered, cfg.closing_phrases)
print("strip closing:", no_signature)

# --- the same thing end to end, as the service does it ------------------
email = RawEmail(
    id="demo-1",
    from_addr="ana@example.rs",
    to_addrs=("podrska@telekom.example",),
    subject="Рачун",
    body="Дуплиран рачун за јул. Срдачан поздрав, Ана",
    received_at=datetime(2025, 7, 3, 9, 30, tzinfo=timezone.utc),
)
doc = preprocess_for_inference(email, cfg)
print("\ninference text:", repr(doc.text))
print("steps applied: ", " -> ".join(doc.applied_steps))

# --- training gates ------------------------------------------------------
def mail(i, body):
    return RawEmail(
        id=f"m{i}", from_addr="kupac@example.rs", to_addrs=(),
        subject="", body=body,
        received_at=datetime(2025, 7, 1, 8, i, tzinfo=timezone.utc),
    )

batch = [
    mail(0, "internet ne radi u stanu vec tri dana molim proverite"),
    mail(1, "hvala vam puno"),                                   # too short
    mail(2, "internet ne radi u stanu vec tri dana molim proverite"),  # duplicate
    mail(3, " ".join(f"rec{chr(97 + j % 26)}" for j in range(300))),   # too long
    mail(4, "necu biti tu i am out of office until september hvala"),  # automated
]
kept, rejected = preprocess_for_training(batch, cfg)
print("\nkept:", [d.email_id for d in kept])
for email_id, reason in rejected:
    print(f"rejected {email_id}: {reason}")
