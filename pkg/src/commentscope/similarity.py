"""Similarity primitives: embedding providers, cosine, keyword overlap.

The default provider is a deterministic hashed character-n-gram embedder so
the whole pipeline runs offline and reproducibly. Deployments can swap in a
real sentence-embedding service through the HTTP provider.
"""

from __future__ import annotations

import hashlib
import re
import threading
from typing import Iterable, Protocol, Sequence

import numpy as np


class EmbeddingError(RuntimeError):
    """Configuration problem (e.g. dimension mismatch)."""


class EmbeddingTransportError(EmbeddingError):
    """Remote provider unreachable; retriable."""


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def keyword_overlap(candidate: Iterable[str], reference: Iterable[str]) -> float:
    """|candidate ∩ reference| / |candidate|; 0.0 for an empty candidate set.

    The denominator is the candidate fragment because the question asked is
    "how much of this fragment is covered by the article sentence".
    """
    cand = set(candidate)
    if not cand:
        return 0.0
    return len(cand & set(reference)) / len(cand)


class HashedNgramEmbedder:
    """Offline fallback embedder: hashed char n-grams (n=1..3) into D buckets.

    Pure and deterministic across machines: bucketing uses md5, not the
    process-seeded builtin hash. Embeddings are L2-normalized; an input with
    no n-grams maps to the all-zeros vector (cosine with anything is 0).
    """

    def __init__(self, dimension: int = 256):
        self.name = "hashed-ngram"
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _normalize(text: str) -> str:
        return re.sub(r"\s+", " ", text.strip().lower())

    def embed(self, text: str) -> np.ndarray:
        key = self._normalize(text)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        vec = np.zeros(self.dimension, dtype=np.float64)
        for n in (1, 2, 3):
            for i in range(len(key) - n + 1):
                gram = key[i : i + n]
                digest = hashlib.md5(gram.encode("utf-8")).digest()
                bucket = int.from_bytes(digest[:4], "little") % self.dimension
                vec[bucket] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        vec.setflags(write=False)
        with self._lock:
            self._cache[key] = vec
        return vec

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class HttpEmbeddingProvider:
    """Remote embedding service: POST {endpoint}/embed {"texts": [...]}."""

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        token: str | None = None,
        timeout: float = 30.0,
        max_in_flight: int = 4,
    ):
        self.name = f"http:{endpoint}"
        self.endpoint = endpoint.rstrip("/")
        self.dimension = dimension
        self.token = token
        self.timeout = timeout
        self._sem = threading.Semaphore(max_in_flight)

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        with self._sem:
            try:
                resp = requests.post(
                    f"{self.endpoint}/embed",
                    json={"texts": list(texts)},
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
            except requests.RequestException as exc:
                raise EmbeddingTransportError(f"embedding provider unreachable: {exc}") from exc
        vectors = resp.json().get("vectors", [])
        if len(vectors) != len(texts):
            raise EmbeddingError(f"provider returned {len(vectors)} vectors for {len(texts)} texts")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dimension,):
                raise EmbeddingError(f"dimension mismatch: expected {self.dimension}, got {arr.shape}")
            out.append(arr)
        return out
