"""Embedding providers.

The index works against anything satisfying the Embedder protocol:
a stable ``embedder_id``, a fixed ``dimension``, and a batch ``embed``.
"""

from __future__ import annotations

import zlib
from math import sqrt
from typing import Protocol, Sequence, runtime_checkable

import requests

from .errors import EmbeddingFailed


@runtime_checkable
class Embedder(Protocol):
    embedder_id: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class HashEmbedder:
    """Deterministic bag-of-tokens embedder.

    Hashes each whitespace token into one of ``dimension`` buckets, counts,
    and L2-normalizes. No weights, no network: suitable for tests and for
    deployments that only need lexical-ish vectors. Token-less input maps to
    the first basis vector so cosine stays defined.
    """

    def __init__(self, dimension: int = 64):
        self.dimension = dimension
        self.embedder_id = f"token-hash-{dimension}"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> list[float]:
        counts = [0.0] * self.dimension
        for token in text.split():
            counts[zlib.crc32(token.encode("utf-8")) % self.dimension] += 1.0
        norm_sq = 0.0
        for c in counts:
            norm_sq += c * c
        if norm_sq == 0.0:
            counts[0] = 1.0
            return counts
        norm = sqrt(norm_sq)
        return [c / norm for c in counts]


class RemoteEmbedder:
    """Client for an embeddings HTTP endpoint (OpenAI-style request shape).

    POSTs {"model": ..., "input": [...]} and expects
    {"data": [{"embedding": [...]}, ...]} in input order.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        api_key: str | None = None,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dimension = dimension
        self.embedder_id = f"remote-{model}"
        self._api_key = api_key
        self._timeout = timeout
        self._session = session or requests.Session()

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if not texts:
            return []
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            resp = self._session.post(
                self.endpoint,
                json={"model": self.model, "input": list(texts)},
                headers=headers,
                timeout=self._timeout,
            )
        except requests.RequestException as e:
            raise EmbeddingFailed(f"embedding request failed: {e}") from e
        if resp.status_code != 200:
            raise EmbeddingFailed(
                f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            rows = resp.json()["data"]
            vectors = [[float(x) for x in row["embedding"]] for row in rows]
        except (KeyError, TypeError, ValueError) as e:
            raise EmbeddingFailed(f"malformed embedding response: {e}") from e
        if len(vectors) != len(texts):
            raise EmbeddingFailed(
                f"embedding count mismatch: sent {len(texts)}, got {len(vectors)}"
            )
        for v in vectors:
            if len(v) != self.dimension:
                raise EmbeddingFailed(
                    f"embedding dimension mismatch: expected {self.dimension}, got {len(v)}"
                )
        return vectors
