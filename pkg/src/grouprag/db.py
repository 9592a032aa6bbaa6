"""Relational store: schema and engine setup.

Everything persistent lives in one database (domain rows, search index side
table, blob reference counts, API tokens). Integrity rules the rest of the
system relies on are enforced here as constraints: sibling-name uniqueness,
per-collection content-hash uniqueness, and cascade delete from documents to
chunks to index entries.
"""

from __future__ import annotations

import uuid
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Iterator

from sqlalchemy import (
    JSON,
    Boolean,
    DateTime,
    ForeignKey,
    Index,
    Integer,
    String,
    Text,
    UniqueConstraint,
    create_engine,
    event,
    text,
)
from sqlalchemy.orm import (
    DeclarativeBase,
    Mapped,
    Session,
    mapped_column,
    relationship,
    sessionmaker,
)
from sqlalchemy.pool import StaticPool


def new_id() -> str:
    return uuid.uuid4().hex


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Base(DeclarativeBase):
    pass


class Principal(Base):
    __tablename__ = "principals"

    id: Mapped[str] = mapped_column(String(64), primary_key=True)
    display_name: Mapped[str] = mapped_column(String(255), default="")


class Collection(Base):
    __tablename__ = "collections"

    id: Mapped[str] = mapped_column(String(64), primary_key=True, default=new_id)
    name: Mapped[str] = mapped_column(String(255), nullable=False)
    owner_id: Mapped[str] = mapped_column(ForeignKey("principals.id"), index=True)
    parent_id: Mapped[str | None] = mapped_column(
        ForeignKey("collections.id", ondelete="CASCADE"), nullable=True, index=True
    )
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=utcnow)

    documents = relationship(
        "Document", back_populates="collection", cascade="all, delete-orphan"
    )

    # Sibling names are unique under one parent; root names are unique per
    # owner (each user gets their own top-level namespace).
    __table_args__ = (
        Index(
            "ix_collections_sibling_name",
            "parent_id",
            "name",
            unique=True,
            sqlite_where=text("parent_id IS NOT NULL"),
            postgresql_where=text("parent_id IS NOT NULL"),
        ),
        Index(
            "ix_collections_root_name",
            "owner_id",
            "name",
            unique=True,
            sqlite_where=text("parent_id IS NULL"),
            postgresql_where=text("parent_id IS NULL"),
        ),
    )


class PermissionGrant(Base):
    __tablename__ = "permission_grants"

    collection_id: Mapped[str] = mapped_column(
        ForeignKey("collections.id", ondelete="CASCADE"), primary_key=True
    )
    principal_id: Mapped[str] = mapped_column(
        ForeignKey("principals.id"), primary_key=True
    )
    level: Mapped[str] = mapped_column(String(8))  # "VIEW" | "EDIT"


class Document(Base):
    __tablename__ = "documents"

    id: Mapped[str] = mapped_column(String(64), primary_key=True, default=new_id)
    collection_id: Mapped[str] = mapped_column(
        ForeignKey("collections.id", ondelete="CASCADE"), index=True
    )
    kind: Mapped[str] = mapped_column(String(16))
    title: Mapped[str] = mapped_column(String(512), default="")
    source_meta: Mapped[dict] = mapped_column(JSON, default=dict)
    content_hash: Mapped[str] = mapped_column(String(64))  # hex sha-256
    blob_digest: Mapped[str | None] = mapped_column(String(64), nullable=True)
    ingested_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=utcnow)

    collection = relationship("Collection", back_populates="documents")
    chunks = relationship(
        "TextChunk",
        back_populates="document",
        cascade="all, delete-orphan",
        order_by="TextChunk.seq",
    )

    __table_args__ = (
        UniqueConstraint("collection_id", "content_hash", name="uq_documents_content"),
    )


class TextChunk(Base):
    __tablename__ = "text_chunks"

    id: Mapped[str] = mapped_column(String(64), primary_key=True, default=new_id)
    document_id: Mapped[str] = mapped_column(
        ForeignKey("documents.id", ondelete="CASCADE"), index=True
    )
    seq: Mapped[int] = mapped_column(Integer)
    span_start: Mapped[int] = mapped_column(Integer)
    span_end: Mapped[int] = mapped_column(Integer)
    text: Mapped[str] = mapped_column(Text)
    embedding_json: Mapped[str] = mapped_column(Text)  # JSON array of floats
    embedder_id: Mapped[str] = mapped_column(String(64))

    document = relationship("Document", back_populates="chunks")

    __table_args__ = (UniqueConstraint("document_id", "seq", name="uq_chunks_seq"),)


class IndexEntry(Base):
    """Search-index side table: one row per indexed chunk, holding the
    embedding and the precomputed trigram set."""

    __tablename__ = "index_entries"

    chunk_id: Mapped[str] = mapped_column(
        ForeignKey("text_chunks.id", ondelete="CASCADE"), primary_key=True
    )
    document_id: Mapped[str] = mapped_column(String(64), index=True)
    collection_id: Mapped[str] = mapped_column(String(64), index=True)
    embedder_id: Mapped[str] = mapped_column(String(64))
    embedding_json: Mapped[str] = mapped_column(Text)
    trigrams_json: Mapped[str] = mapped_column(Text)  # JSON array of 3-char strings
    text: Mapped[str] = mapped_column(Text)


class BlobRecord(Base):
    """Reference count and metadata for one content-addressed object."""

    __tablename__ = "blob_records"

    digest: Mapped[str] = mapped_column(String(64), primary_key=True)
    size: Mapped[int] = mapped_column(Integer)
    media_type: Mapped[str] = mapped_column(String(128), default="application/octet-stream")
    refcount: Mapped[int] = mapped_column(Integer, default=0)


class ApiToken(Base):
    __tablename__ = "api_tokens"

    token_hash: Mapped[str] = mapped_column(String(64), primary_key=True)
    principal_id: Mapped[str] = mapped_column(ForeignKey("principals.id"), index=True)
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=utcnow)
    revoked: Mapped[bool] = mapped_column(Boolean, default=False)


class Store:
    """Engine plus session factory. ``begin()`` hands out a transactional
    session that commits on success and rolls back on any exception."""

    def __init__(self, url: str = "sqlite://", echo: bool = False):
        kwargs: dict = {"echo": echo, "future": True}
        if url.startswith("sqlite"):
            kwargs["connect_args"] = {"check_same_thread": False}
            if url in ("sqlite://", "sqlite:///:memory:"):
                kwargs["poolclass"] = StaticPool
        self.engine = create_engine(url, **kwargs)
        if url.startswith("sqlite"):
            event.listen(self.engine, "connect", _enable_sqlite_fks)
        Base.metadata.create_all(self.engine)
        self._sessions = sessionmaker(self.engine, expire_on_commit=False, future=True)

    def session(self) -> Session:
        return self._sessions()

    @contextmanager
    def begin(self) -> Iterator[Session]:
        with self._sessions() as session:
            with session.begin():
                yield session


def _enable_sqlite_fks(dbapi_connection, _record) -> None:
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()
