"""Ingestion pipeline: raw sources to indexed, retrievable chunks.

Each ingest runs extract -> attach -> chunk -> embed -> index inside one
transaction, so a failure at any stage leaves the store exactly as it was.
Blob bytes are written to the object backend before the transaction commits;
if the transaction fails, the unreferenced object is garbage collected.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Mapping

from sqlalchemy.orm import Session

from . import catalog
from .arxiv import ArxivClient, ArxivRecord
from .blobs import BlobStore
from .catalog import PermissionLevel
from .chunking import ChunkPolicy, chunk_text
from .db import Document, Store, TextChunk, new_id
from .embedders import Embedder
from .errors import EmbeddingFailed, ExtractionFailed, GroupRagError, NetworkError
from .extract import DEFAULT_EXTRACTORS, Extractor, extract_text, normalize_text
from .search import SearchIndex
from .transcripts import flatten_turns, parse_transcript


class IngestionPipeline:
    def __init__(
        self,
        store: Store,
        blob_store: BlobStore,
        embedder: Embedder,
        index: SearchIndex,
        policy: ChunkPolicy | None = None,
        extractors: Mapping[str, Extractor] | None = None,
        arxiv_client: ArxivClient | None = None,
    ):
        self.store = store
        self.blob_store = blob_store
        self.embedder = embedder
        self.index = index
        self.policy = policy or ChunkPolicy()
        self.extractors = dict(extractors if extractors is not None else DEFAULT_EXTRACTORS)
        self.arxiv_client = arxiv_client or ArxivClient()

    # -- public entry points -------------------------------------------

    def ingest_upload(
        self,
        caller_id: str,
        collection_id: str,
        title: str,
        data: bytes,
        kind: str,
        media_type: str = "application/octet-stream",
        source_meta: Mapping[str, str] | None = None,
    ) -> Document:
        """Ingest an uploaded file of the given kind."""
        text = extract_text(data, kind, self.extractors)
        if kind == "TRANSCRIPT":
            text = flatten_turns(parse_transcript(text))
        meta = {"imported_at": _now_iso(), **(source_meta or {})}
        return self._ingest(
            caller_id, collection_id, kind, title, text, meta,
            blob=data, media_type=media_type,
        )

    def ingest_transcript(
        self, caller_id: str, collection_id: str, title: str, raw_text: str
    ) -> Document:
        """Ingest transcript text directly (no original file)."""
        turns = parse_transcript(normalize_text(raw_text))
        canonical = flatten_turns(turns)
        meta = {"imported_at": _now_iso(), "turns": str(len(turns))}
        return self._ingest(caller_id, collection_id, "TRANSCRIPT", title, canonical, meta)

    def ingest_arxiv(
        self,
        caller_id: str,
        collection_id: str,
        record_or_id: ArxivRecord | str,
        title: str | None = None,
    ) -> Document:
        """Import a paper from arXiv.

        Stores the PDF blob when it can be fetched and extracts its text when
        the PDF extractor succeeds; otherwise indexes title plus abstract,
        recording the degradation in source_meta.
        """
        record = (
            record_or_id
            if isinstance(record_or_id, ArxivRecord)
            else self.arxiv_client.fetch(record_or_id)
        )
        pdf_bytes: bytes | None = None
        try:
            pdf_bytes = self.arxiv_client.fetch_pdf(record)
        except NetworkError:
            pdf_bytes = None

        text: str | None = None
        text_source = "title_abstract"
        if pdf_bytes is not None and "PDF_TEXT" in self.extractors:
            try:
                extracted = extract_text(pdf_bytes, "PDF_TEXT", self.extractors)
                if extracted.strip():
                    text = extracted
                    text_source = "pdf"
            except ExtractionFailed:
                text = None
        if text is None:
            text = normalize_text(f"{record.title}\n\n{record.abstract}")

        meta = {
            "arxiv_id": record.arxiv_id,
            "authors": ", ".join(record.authors),
            "abstract": record.abstract,
            "pdf_url": record.pdf_url,
            "text_source": text_source,
            "imported_at": _now_iso(),
        }
        return self._ingest(
            caller_id, collection_id, "PDF_TEXT", title or record.title, text, meta,
            blob=pdf_bytes, media_type="application/pdf",
        )

    def delete_document(self, caller_id: str, document_id: str) -> int:
        """Remove a document, its chunks, its index entries, and its blob
        reference. Returns the number of chunks removed."""
        release_digest: str | None = None
        with self.store.begin() as session:
            doc = catalog.get_document(session, document_id)
            catalog.require_permission(
                session, caller_id, doc.collection_id, PermissionLevel.EDIT
            )
            removed = catalog.chunk_count(session, document_id)
            self.index.remove_chunks(session, document_id)
            if doc.blob_digest is not None:
                if self.blob_store.release_ref(session, doc.blob_digest) == 0:
                    release_digest = doc.blob_digest
            session.delete(doc)
        if release_digest is not None:
            self.blob_store.collect_garbage(release_digest)
        return removed

    def reindex(self, embedder: Embedder | None = None) -> int:
        """Re-embed every chunk with the current (or given) embedder and
        rebuild its index entry. Returns the number of chunks processed."""
        if embedder is not None:
            self.embedder = embedder
            self.index.embedder = embedder
        count = 0
        with self.store.begin() as session:
            docs = session.query(Document).order_by(Document.id).all()
            for doc in docs:
                chunks = sorted(doc.chunks, key=lambda c: c.seq)
                if not chunks:
                    continue
                vectors = self._embed([c.text for c in chunks])
                for chunk, vector in zip(chunks, vectors):
                    chunk.embedding_json = json.dumps(vector)
                    chunk.embedder_id = self.embedder.embedder_id
                session.flush()
                self.index.index_chunks(session, chunks)
                count += len(chunks)
        return count

    # -- internals -------------------------------------------------------

    def _ingest(
        self,
        caller_id: str,
        collection_id: str,
        kind: str,
        title: str,
        canonical_text: str,
        source_meta: dict,
        blob: bytes | None = None,
        media_type: str = "application/octet-stream",
    ) -> Document:
        blob_digest: str | None = None
        try:
            with self.store.begin() as session:
                if blob is not None:
                    ref = self.blob_store.put_ref(session, blob, media_type)
                    blob_digest = ref.digest
                doc = catalog.attach_document(
                    session,
                    collection_id,
                    kind,
                    title,
                    canonical_text,
                    source_meta=source_meta,
                    blob_digest=blob_digest,
                    caller_id=caller_id,
                )
                chunks = self._build_chunks(session, doc, canonical_text)
                self.index.index_chunks(session, chunks)
                return doc
        except Exception:
            if blob_digest is not None:
                self.blob_store.collect_garbage(blob_digest)
            raise

    def _build_chunks(
        self, session: Session, doc: Document, canonical_text: str
    ) -> list[TextChunk]:
        spans = chunk_text(canonical_text, self.policy)
        if not spans:
            return []
        texts = [canonical_text[s.start : s.end] for s in spans]
        vectors = self._embed(texts)
        chunks = [
            TextChunk(
                id=new_id(),
                document_id=doc.id,
                seq=i,
                span_start=span.start,
                span_end=span.end,
                text=text,
                embedding_json=json.dumps(vector),
                embedder_id=self.embedder.embedder_id,
            )
            for i, (span, text, vector) in enumerate(zip(spans, texts, vectors))
        ]
        session.add_all(chunks)
        session.flush()
        return chunks

    def _embed(self, texts: list[str]) -> list[list[float]]:
        try:
            vectors = self.embedder.embed(texts)
        except GroupRagError:
            raise
        except Exception as e:
            raise EmbeddingFailed(f"embedding failed: {e}") from e
        if len(vectors) != len(texts):
            raise EmbeddingFailed(
                f"embedder returned {len(vectors)} vectors for {len(texts)} texts"
            )
        return vectors


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
