"""Collections, grants, documents: the domain operations and the permission
lattice.

Permissions: NONE < VIEW < EDIT. Owners hold EDIT implicitly on their
collection and everything below it; grants inherit downward with max
semantics and there are no deny rules. Collections are private by default:
a principal with no grant anywhere on the ancestor chain gets NONE.
Granting is owner-only; EDIT confers content mutation, not sharing.
"""

from __future__ import annotations

import hashlib
from enum import IntEnum

from sqlalchemy import func, select
from sqlalchemy.exc import IntegrityError as SAIntegrityError
from sqlalchemy.orm import Session

from .db import Collection, Document, PermissionGrant, Principal, TextChunk
from .errors import (
    CollectionNotFound,
    CycleDetected,
    DocumentNotFound,
    DuplicateContentInCollection,
    DuplicateSiblingName,
    InvalidArgument,
    ParentNotFound,
    PermissionDenied,
    PrincipalNotFound,
)

DOCUMENT_KINDS = ("PDF_TEXT", "TEX", "TRANSCRIPT", "NOTE")


class PermissionLevel(IntEnum):
    NONE = 0
    VIEW = 1
    EDIT = 2

    @classmethod
    def parse(cls, value: "str | PermissionLevel") -> "PermissionLevel":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise InvalidArgument(f"unknown permission level: {value!r}") from None


def content_hash(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()


def get_principal(session: Session, principal_id: str) -> Principal:
    p = session.get(Principal, principal_id)
    if p is None:
        raise PrincipalNotFound(f"no principal {principal_id!r}")
    return p


def get_collection(session: Session, collection_id: str) -> Collection:
    c = session.get(Collection, collection_id)
    if c is None:
        raise CollectionNotFound(f"no collection {collection_id!r}")
    return c


def get_document(session: Session, document_id: str) -> Document:
    d = session.get(Document, document_id)
    if d is None:
        raise DocumentNotFound(f"no document {document_id!r}")
    return d


def ancestor_chain(session: Session, collection: Collection) -> list[Collection]:
    """The collection itself followed by its ancestors up to the root."""
    chain = [collection]
    seen = {collection.id}
    node = collection
    while node.parent_id is not None:
        node = get_collection(session, node.parent_id)
        if node.id in seen:  # defensive; the store forbids cycles
            raise CycleDetected(f"parent links of {collection.id} form a cycle")
        seen.add(node.id)
        chain.append(node)
    return chain


def effective_permission(
    session: Session, principal_id: str, collection_id: str
) -> PermissionLevel:
    """EDIT if the principal owns the collection or any ancestor, else the
    max granted level along the ancestor chain, else NONE."""
    collection = get_collection(session, collection_id)
    level = PermissionLevel.NONE
    for node in ancestor_chain(session, collection):
        if node.owner_id == principal_id:
            return PermissionLevel.EDIT
        grant = session.get(PermissionGrant, (node.id, principal_id))
        if grant is not None:
            level = max(level, PermissionLevel.parse(grant.level))
    return level


def require_permission(
    session: Session,
    principal_id: str,
    collection_id: str,
    needed: PermissionLevel,
) -> None:
    have = effective_permission(session, principal_id, collection_id)
    if have < needed:
        raise PermissionDenied(
            f"principal {principal_id!r} needs {needed.name} on collection "
            f"{collection_id!r}, has {have.name}"
        )


def _check_sibling_name(
    session: Session,
    name: str,
    owner_id: str,
    parent_id: str | None,
    exclude_id: str | None = None,
) -> None:
    q = select(Collection.id).where(Collection.name == name)
    if parent_id is None:
        q = q.where(Collection.parent_id.is_(None), Collection.owner_id == owner_id)
    else:
        q = q.where(Collection.parent_id == parent_id)
    if exclude_id is not None:
        q = q.where(Collection.id != exclude_id)
    if session.execute(q.limit(1)).first() is not None:
        raise DuplicateSiblingName(f"a sibling collection named {name!r} already exists")


def create_collection(
    session: Session, name: str, owner_id: str, parent_id: str | None = None
) -> Collection:
    """Create a collection owned by the caller. Requires EDIT on the parent,
    if one is given. The new collection starts with no grants."""
    if not name or not name.strip():
        raise InvalidArgument("collection name must be non-empty")
    get_principal(session, owner_id)
    if parent_id is not None:
        if session.get(Collection, parent_id) is None:
            raise ParentNotFound(f"no parent collection {parent_id!r}")
        require_permission(session, owner_id, parent_id, PermissionLevel.EDIT)
    _check_sibling_name(session, name, owner_id, parent_id)
    collection = Collection(name=name, owner_id=owner_id, parent_id=parent_id)
    session.add(collection)
    try:
        session.flush()
    except SAIntegrityError as e:
        raise DuplicateSiblingName(str(e.orig)) from e
    return collection


def move_collection(
    session: Session,
    collection_id: str,
    new_parent_id: str | None,
    caller_id: str,
) -> Collection:
    """Reparent a collection, preserving the forest property. Grants are not
    rewritten; inherited effective permissions change implicitly."""
    collection = get_collection(session, collection_id)
    require_permission(session, caller_id, collection_id, PermissionLevel.EDIT)
    if new_parent_id is not None:
        if session.get(Collection, new_parent_id) is None:
            raise ParentNotFound(f"no parent collection {new_parent_id!r}")
        require_permission(session, caller_id, new_parent_id, PermissionLevel.EDIT)
        new_parent = get_collection(session, new_parent_id)
        for node in ancestor_chain(session, new_parent):
            if node.id == collection.id:
                raise CycleDetected(
                    f"cannot move {collection_id!r} under its own descendant"
                )
    _check_sibling_name(
        session, collection.name, collection.owner_id, new_parent_id,
        exclude_id=collection.id,
    )
    collection.parent_id = new_parent_id
    try:
        session.flush()
    except SAIntegrityError as e:
        raise DuplicateSiblingName(str(e.orig)) from e
    return collection


def grant_permission(
    session: Session,
    collection_id: str,
    principal_id: str,
    level: str | PermissionLevel,
    caller_id: str,
) -> PermissionGrant:
    """Record a grant, replacing any prior grant for the same pair.
    Only the collection owner may grant."""
    collection = get_collection(session, collection_id)
    if collection.owner_id != caller_id:
        raise PermissionDenied(
            f"only the owner of {collection_id!r} can grant permissions"
        )
    get_principal(session, principal_id)
    parsed = PermissionLevel.parse(level)
    if parsed == PermissionLevel.NONE:
        raise InvalidArgument("grant level must be VIEW or EDIT")
    grant = session.get(PermissionGrant, (collection_id, principal_id))
    if grant is None:
        grant = PermissionGrant(
            collection_id=collection_id, principal_id=principal_id, level=parsed.name
        )
        session.add(grant)
    else:
        grant.level = parsed.name
    session.flush()
    return grant


def attach_document(
    session: Session,
    collection_id: str,
    kind: str,
    title: str,
    canonical_text: str,
    source_meta: dict | None = None,
    blob_digest: str | None = None,
    caller_id: str = "",
) -> Document:
    """Persist a document row. The same content (by hash of canonical text)
    cannot appear twice in one collection."""
    if kind not in DOCUMENT_KINDS:
        raise InvalidArgument(f"unknown document kind: {kind!r}")
    require_permission(session, caller_id, collection_id, PermissionLevel.EDIT)
    digest = content_hash(canonical_text)
    existing = session.execute(
        select(Document.id)
        .where(Document.collection_id == collection_id, Document.content_hash == digest)
        .limit(1)
    ).first()
    if existing is not None:
        raise DuplicateContentInCollection(
            f"collection {collection_id!r} already contains this content"
        )
    doc = Document(
        collection_id=collection_id,
        kind=kind,
        title=title,
        source_meta=dict(source_meta or {}),
        content_hash=digest,
        blob_digest=blob_digest,
    )
    session.add(doc)
    try:
        session.flush()
    except SAIntegrityError as e:
        raise DuplicateContentInCollection(str(e.orig)) from e
    return doc


def chunk_count(session: Session, document_id: str) -> int:
    return session.execute(
        select(func.count()).select_from(TextChunk).where(TextChunk.document_id == document_id)
    ).scalar_one()


def list_visible_collections(
    session: Session, principal_id: str
) -> list[tuple[Collection, PermissionLevel]]:
    """All collections where the principal has at least VIEW, with the level."""
    out = []
    for c in session.execute(select(Collection).order_by(Collection.created_at, Collection.id)).scalars():
        level = effective_permission(session, principal_id, c.id)
        if level >= PermissionLevel.VIEW:
            out.append((c, level))
    return out
