"""Document embedding providers behind one small interface.

The reference provider hashes character 3-grams into a fixed number of
signed buckets and L2-normalizes, which is deterministic, dependency-free,
and close enough semantically for clustering tests. The remote provider
talks JSON over HTTP to a sentence-embedding service and is the production
path.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .errors import RemoteEmbeddingError

DEFAULT_DIM = 256
DEFAULT_MAX_TOKENS = 128
EMBED_URL_ENV = "MAILTOPICS_EMBED_URL"


class EmbeddingProvider:
    """Interface: deterministic embed_batch and count_tokens."""

    dim: int
    max_tokens: int

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        """Return an (n_texts, dim) float64 array, order preserved."""
        raise NotImplementedError

    def count_tokens(self, text: str) -> int:
        raise NotImplementedError


class ReferenceProvider(EmbeddingProvider):
    """Hashed bag of character 3-grams with signed buckets, unit L2 norm.

    Tokens beyond max_tokens are truncated before hashing, mirroring the
    production model's input limit. Empty text embeds as the zero vector.
    """

    def __init__(self, dim: int = DEFAULT_DIM, max_tokens: int = DEFAULT_MAX_TOKENS):
        self.dim = dim
        self.max_tokens = max_tokens

    def count_tokens(self, text: str) -> int:
        return len(text.split())

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = text.split()[: self.max_tokens]
        if not tokens:
            return vec
        padded = f" {' '.join(tokens)} "
        for i in range(len(padded) - 2):
            gram = padded[i : i + 3]
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
            h = int.from_bytes(digest, "little")
            bucket = h % self.dim
            sign = 1.0 if (h >> 63) & 1 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self._embed_one(t) for t in texts]) if texts else np.zeros((0, self.dim))


class RemoteProvider(EmbeddingProvider):
    """HTTP client for an external embedding service.

    POST {url}/embed with {"texts": [...]} -> {"vectors": [[...], ...],
    "dim": N}. Requests go out in batches of `batch_size`, at most
    `max_in_flight` concurrently, with 3 retries and exponential backoff per
    batch. Output order always matches input order.
    """

    def __init__(
        self,
        url: str | None = None,
        dim: int = 768,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        batch_size: int = 64,
        max_in_flight: int = 4,
        retries: int = 3,
        backoff: float = 0.5,
        session=None,
    ):
        self.url = (url or os.environ.get(EMBED_URL_ENV, "")).rstrip("/")
        if not self.url:
            raise ValueError(f"remote embedding URL missing (set {EMBED_URL_ENV})")
        self.dim = dim
        self.max_tokens = max_tokens
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.retries = retries
        self.backoff = backoff
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def count_tokens(self, text: str) -> int:
        # Whitespace approximation; the service tokenizes authoritatively.
        return len(text.split())

    def _post_batch(self, texts: list[str], start: int) -> np.ndarray:
        last_err: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    f"{self.url}/embed", json={"texts": texts}, timeout=60
                )
                resp.raise_for_status()
                payload = resp.json()
                vectors = np.asarray(payload["vectors"], dtype=np.float64)
                if vectors.shape != (len(texts), payload.get("dim", self.dim)):
                    raise ValueError(f"bad vector shape {vectors.shape}")
                return vectors
            except Exception as err:  # noqa: BLE001 - transport errors vary
                last_err = err
                if attempt < self.retries - 1:
                    time.sleep(self.backoff * (2**attempt))
        raise RemoteEmbeddingError(
            f"embedding batch [{start}:{start + len(texts)}] failed: {last_err}",
            start=start,
            end=start + len(texts),
        )

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        texts = [" ".join(t.split()[: self.max_tokens]) for t in texts]
        if not texts:
            return np.zeros((0, self.dim))
        batches = [
            (i, texts[i : i + self.batch_size])
            for i in range(0, len(texts), self.batch_size)
        ]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            futures = [pool.submit(self._post_batch, chunk, start) for start, chunk in batches]
            parts = [f.result() for f in futures]
        return np.concatenate(parts, axis=0)


def make_provider(kind: str = "reference", **kwargs) -> EmbeddingProvider:
    if kind == "reference":
        return ReferenceProvider(**kwargs)
    if kind == "remote":
        return RemoteProvider(**kwargs)
    raise ValueError(f"unknown embedding provider {kind!r}")
