"""Hybrid retrieval over the index side table.

Candidate generation runs two exact scans (cosine over embeddings, Jaccard
over trigram sets), unions the per-scan top pools, and reranks the union by
the fused score

    fused = alpha * (cosine + 1) / 2 + (1 - alpha) * trigram

sorted descending with ties broken by ascending chunk id, so results are
reproducible and oracle-testable. The scans are exact by design; an
approximate vector structure can replace candidate generation behind the
same interface if a deployment outgrows full scans.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Sequence

from sqlalchemy import delete, func, select
from sqlalchemy.orm import Session

from . import catalog
from .catalog import PermissionLevel
from .db import IndexEntry, TextChunk
from .embedders import Embedder
from .errors import (
    DimensionMismatch,
    EmbedderMismatch,
    EmbeddingFailed,
    EmptyScope,
    GroupRagError,
    PermissionDenied,
)
from .similarity import cosine_similarity, jaccard, trigram_set

DEFAULT_ALPHA = 0.7
DEFAULT_K = 8
DEFAULT_POOL = 50


@dataclass(frozen=True)
class FusionWeights:
    """Knobs for hybrid ranking: vector weight, result count, and the two
    per-scan candidate pool sizes."""

    alpha: float = DEFAULT_ALPHA
    k: int = DEFAULT_K
    n_vec: int = DEFAULT_POOL
    n_lex: int = DEFAULT_POOL

    def __post_init__(self) -> None:
        from .errors import InvalidArgument

        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgument(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k < 1 or self.n_vec < 1 or self.n_lex < 1:
            raise InvalidArgument("k, n_vec and n_lex must be positive")
        if self.k > self.n_vec + self.n_lex:
            raise InvalidArgument(
                f"k={self.k} exceeds candidate capacity n_vec+n_lex={self.n_vec + self.n_lex}"
            )


@dataclass(frozen=True)
class ChunkHit:
    chunk_id: str
    document_id: str
    collection_id: str
    cosine_score: float
    trigram_score: float
    fused_score: float
    snippet: str


def fused_score(alpha: float, cosine: float, trigram: float) -> float:
    return alpha * (cosine + 1.0) / 2.0 + (1.0 - alpha) * trigram


class SearchIndex:
    """Vector + trigram index bound to one embedder (index-wide dimension)."""

    def __init__(self, embedder: Embedder):
        self.embedder = embedder

    @property
    def dimension(self) -> int:
        return self.embedder.dimension

    def index_chunks(self, session: Session, chunks: Sequence[TextChunk]) -> None:
        """Upsert chunks into both indices; idempotent per chunk id. The whole
        batch is validated before anything is written."""
        pending = []
        for chunk in chunks:
            vector = json.loads(chunk.embedding_json)
            if len(vector) != self.dimension:
                raise DimensionMismatch(
                    f"chunk {chunk.id}: embedding has dimension {len(vector)}, "
                    f"index expects {self.dimension}"
                )
            if chunk.embedder_id != self.embedder.embedder_id:
                raise EmbedderMismatch(
                    f"chunk {chunk.id}: embedder {chunk.embedder_id!r} does not match "
                    f"index embedder {self.embedder.embedder_id!r}"
                )
            pending.append(chunk)
        for chunk in pending:
            document = chunk.document
            session.merge(
                IndexEntry(
                    chunk_id=chunk.id,
                    document_id=chunk.document_id,
                    collection_id=document.collection_id,
                    embedder_id=chunk.embedder_id,
                    embedding_json=chunk.embedding_json,
                    trigrams_json=json.dumps(sorted(trigram_set(chunk.text))),
                    text=chunk.text,
                )
            )
        session.flush()

    def remove_chunks(self, session: Session, document_id: str) -> int:
        """Drop all index entries for a document's chunks; 0 if none exist."""
        result = session.execute(
            delete(IndexEntry).where(IndexEntry.document_id == document_id)
        )
        session.flush()
        return result.rowcount or 0

    def entry_count(self, session: Session) -> int:
        return session.execute(select(func.count()).select_from(IndexEntry)).scalar_one()

    def hybrid_search(
        self,
        session: Session,
        query: str,
        scope: set[str],
        caller_id: str,
        weights: FusionWeights | None = None,
    ) -> list[ChunkHit]:
        """Top-k chunks for the query across the scoped collections.

        The caller must hold at least VIEW on every collection in scope.
        """
        weights = weights or FusionWeights()
        if not scope:
            raise EmptyScope("search scope must name at least one collection")
        for collection_id in sorted(scope):
            if (
                catalog.effective_permission(session, caller_id, collection_id)
                < PermissionLevel.VIEW
            ):
                raise PermissionDenied(
                    f"caller {caller_id!r} lacks VIEW on collection {collection_id!r}"
                )
        try:
            query_vector = self.embedder.embed([query])[0]
        except GroupRagError:
            raise
        except Exception as e:
            raise EmbeddingFailed(f"query embedding failed: {e}") from e
        if len(query_vector) != self.dimension:
            raise EmbeddingFailed(
                f"query embedding has dimension {len(query_vector)}, expected {self.dimension}"
            )
        query_trigrams = trigram_set(query)

        entries = (
            session.execute(
                select(IndexEntry)
                .where(IndexEntry.collection_id.in_(sorted(scope)))
                .order_by(IndexEntry.chunk_id)
            )
            .scalars()
            .all()
        )
        scored: list[tuple[IndexEntry, float, float]] = []
        for entry in entries:
            cos = cosine_similarity(query_vector, json.loads(entry.embedding_json))
            tri = jaccard(query_trigrams, frozenset(json.loads(entry.trigrams_json)))
            scored.append((entry, cos, tri))

        top_vec = heapq.nsmallest(weights.n_vec, scored, key=lambda r: (-r[1], r[0].chunk_id))
        top_lex = heapq.nsmallest(weights.n_lex, scored, key=lambda r: (-r[2], r[0].chunk_id))
        candidates: dict[str, tuple[IndexEntry, float, float]] = {}
        for row in top_vec:
            candidates[row[0].chunk_id] = row
        for row in top_lex:
            candidates[row[0].chunk_id] = row

        ranked = sorted(
            candidates.values(),
            key=lambda r: (-fused_score(weights.alpha, r[1], r[2]), r[0].chunk_id),
        )
        return [
            ChunkHit(
                chunk_id=entry.chunk_id,
                document_id=entry.document_id,
                collection_id=entry.collection_id,
                cosine_score=cos,
                trigram_score=tri,
                fused_score=fused_score(weights.alpha, cos, tri),
                snippet=entry.text,
            )
            for entry, cos, tri in ranked[: weights.k]
        ]
