"""HTTP + WebSocket service.

All endpoints except /health require a bearer token. Errors use one JSON
envelope: {"code": ..., "message": ...} with 400 validation, 401 auth,
403 permission, 404 missing, 409 conflict, 502 provider/backend statuses.

Endpoints:
    GET  /health
    POST /collections                {name, parent_id?}
    GET  /collections
    GET  /collections/{id}
    POST /collections/{id}/move     {new_parent_id}
    POST /collections/{id}/grants   {principal_id, level}
    POST /documents                  multipart: file, kind, title, collection_id
    DELETE /documents/{id}
    POST /import/arxiv               {id, collection_id, title?}
    POST /search                     {query, collection_ids, k?}
    WS   /ws/chat?token=...&collections=a,b
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, replace
from typing import Optional

from fastapi import Depends, FastAPI, File, Form, Request, UploadFile, WebSocket
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.websockets import WebSocketDisconnect

from .. import catalog
from ..agent import ChatAgent, ChatSession
from ..arxiv import ArxivClient
from ..blobs import BlobStore, FilesystemBackend, S3Backend
from ..catalog import PermissionLevel
from ..chunking import ChunkPolicy
from ..config import ServiceConfig
from ..db import Collection, Document, Principal, Store
from ..embedders import HashEmbedder, RemoteEmbedder
from ..errors import (
    BackendUnavailable,
    CollectionNotFound,
    ConcurrentTurn,
    ConfigError,
    ConflictError,
    CycleDetected,
    DuplicateContentInCollection,
    DuplicateSiblingName,
    EmbeddingFailed,
    ExtractionFailed,
    GroupRagError,
    IntegrityError,
    InvalidArgument,
    MalformedResponse,
    NetworkError,
    NotFoundError,
    PermissionDenied,
    ProviderError,
    ProviderTimeout,
    ToolArgumentError,
    Unauthorized,
    UnsupportedKind,
)
from ..ingest import IngestionPipeline
from ..llm.providers import HttpChatProvider, ProviderAdapter, ScriptedProvider
from ..search import FusionWeights, SearchIndex
from .auth import TokenService

# Checked in order; first match wins.
_ERROR_MAP: list[tuple[type, int, str]] = [
    (Unauthorized, 401, "UNAUTHORIZED"),
    (PermissionDenied, 403, "PERMISSION_DENIED"),
    (DuplicateContentInCollection, 409, "DUPLICATE_CONTENT"),
    (DuplicateSiblingName, 409, "DUPLICATE_NAME"),
    (CycleDetected, 409, "CYCLE"),
    (ConflictError, 409, "CONFLICT"),
    (NotFoundError, 404, "NOT_FOUND"),
    (UnsupportedKind, 400, "VALIDATION"),
    (ExtractionFailed, 400, "EXTRACTION_FAILED"),
    (InvalidArgument, 400, "VALIDATION"),
    (ToolArgumentError, 400, "VALIDATION"),
    (ProviderTimeout, 502, "PROVIDER_ERROR"),
    (ProviderError, 502, "PROVIDER_ERROR"),
    (BackendUnavailable, 502, "BACKEND_UNAVAILABLE"),
    (EmbeddingFailed, 502, "EMBEDDING_FAILED"),
    (NetworkError, 502, "UPSTREAM_ERROR"),
    (MalformedResponse, 502, "UPSTREAM_ERROR"),
    (IntegrityError, 502, "BACKEND_CORRUPT"),
    (GroupRagError, 500, "INTERNAL"),
]

_TURN_DONE = {"type": "_turn_done"}  # internal queue sentinel, never sent


@dataclass
class Components:
    config: ServiceConfig
    store: Store
    blob_store: BlobStore
    index: SearchIndex
    pipeline: IngestionPipeline
    provider: ProviderAdapter
    agent: ChatAgent
    tokens: TokenService
    weights: FusionWeights


def build_components(
    config: ServiceConfig, arxiv_client: ArxivClient | None = None
) -> Components:
    """Wire every subsystem from a validated config."""
    store = Store(config.database_url)
    if config.blob_backend == "fs":
        backend = FilesystemBackend(config.blob_fs_root)
    else:
        backend = S3Backend(
            endpoint=config.blob_s3_endpoint,
            bucket=config.blob_s3_bucket,
            access_key=config.blob_s3_access_key,
            secret_key=config.blob_s3_secret_key,
            region=config.blob_s3_region,
        )
    blob_store = BlobStore(backend, store)
    if config.embedder == "hash":
        embedder = HashEmbedder(config.embedder_dimension)
    else:
        embedder = RemoteEmbedder(
            endpoint=config.embedder_endpoint,
            model=config.embedder_model,
            dimension=config.embedder_dimension,
            api_key=config.embedder_api_key,
        )
    index = SearchIndex(embedder)
    policy = ChunkPolicy(size=config.chunk_size, overlap=config.chunk_overlap)
    pipeline = IngestionPipeline(
        store, blob_store, embedder, index, policy, arxiv_client=arxiv_client
    )
    if config.provider == "scripted":
        try:
            provider: ProviderAdapter = ScriptedProvider.from_file(config.provider_script)
        except OSError as e:
            raise ConfigError("provider_script", f"cannot read provider script: {e}") from e
    else:
        provider = HttpChatProvider(
            base_url=config.provider_base_url,
            model=config.provider_model,
            api_key=config.provider_api_key,
        )
    weights = FusionWeights(
        alpha=config.fusion_alpha,
        k=config.fusion_k,
        n_vec=config.fusion_n_vec,
        n_lex=config.fusion_n_lex,
    )
    agent = ChatAgent(
        store,
        index,
        provider,
        weights=weights,
        max_tool_rounds=config.max_tool_rounds,
    )
    return Components(
        config=config,
        store=store,
        blob_store=blob_store,
        index=index,
        pipeline=pipeline,
        provider=provider,
        agent=agent,
        tokens=TokenService(store),
        weights=weights,
    )


# --- request bodies ------------------------------------------------------


class CreateCollectionBody(BaseModel):
    name: str
    parent_id: Optional[str] = None


class MoveBody(BaseModel):
    new_parent_id: Optional[str] = None


class GrantBody(BaseModel):
    principal_id: str
    level: str


class ArxivImportBody(BaseModel):
    id: str
    collection_id: str
    title: Optional[str] = None


class SearchBody(BaseModel):
    query: str
    collection_ids: list[str]
    k: Optional[int] = None


# --- serialization -------------------------------------------------------


def _collection_json(c: Collection, level: PermissionLevel | None = None) -> dict:
    out = {
        "id": c.id,
        "name": c.name,
        "owner_id": c.owner_id,
        "parent_id": c.parent_id,
        "created_at": c.created_at.isoformat() if c.created_at else None,
    }
    if level is not None:
        out["permission"] = level.name
    return out


def _document_json(d: Document, chunk_count: int | None = None) -> dict:
    out = {
        "id": d.id,
        "collection_id": d.collection_id,
        "kind": d.kind,
        "title": d.title,
        "source_meta": d.source_meta,
        "content_hash": d.content_hash,
        "blob_digest": d.blob_digest,
        "ingested_at": d.ingested_at.isoformat() if d.ingested_at else None,
    }
    if chunk_count is not None:
        out["chunk_count"] = chunk_count
    return out


def create_app(components: Components) -> FastAPI:
    app = FastAPI(title="grouprag", version="0.1.0")
    store = components.store
    agent = components.agent

    def current_principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise Unauthorized("missing bearer token")
        return components.tokens.authenticate(header[7:].strip())

    @app.exception_handler(GroupRagError)
    async def domain_error_handler(_request, exc: GroupRagError):
        for klass, status, code in _ERROR_MAP:
            if isinstance(exc, klass):
                return JSONResponse(
                    status_code=status, content={"code": code, "message": str(exc)}
                )
        return JSONResponse(status_code=500, content={"code": "INTERNAL", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "VALIDATION", "message": str(exc)}
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/collections", status_code=201)
    def create_collection(
        body: CreateCollectionBody, principal: Principal = Depends(current_principal)
    ):
        with store.begin() as session:
            c = catalog.create_collection(session, body.name, principal.id, body.parent_id)
            return _collection_json(c, PermissionLevel.EDIT)

    @app.get("/collections")
    def list_collections(principal: Principal = Depends(current_principal)):
        with store.session() as session:
            visible = catalog.list_visible_collections(session, principal.id)
            return {"collections": [_collection_json(c, lvl) for c, lvl in visible]}

    @app.get("/collections/{collection_id}")
    def get_collection(
        collection_id: str, principal: Principal = Depends(current_principal)
    ):
        with store.session() as session:
            c = catalog.get_collection(session, collection_id)
            level = catalog.effective_permission(session, principal.id, collection_id)
            if level < PermissionLevel.VIEW:
                raise PermissionDenied(f"no VIEW access to collection {collection_id!r}")
            docs = (
                session.query(Document)
                .filter(Document.collection_id == collection_id)
                .order_by(Document.ingested_at, Document.id)
                .all()
            )
            children = (
                session.query(Collection.id)
                .filter(Collection.parent_id == collection_id)
                .order_by(Collection.id)
                .all()
            )
            out = _collection_json(c, level)
            out["documents"] = [
                _document_json(d, catalog.chunk_count(session, d.id)) for d in docs
            ]
            out["children"] = [row[0] for row in children]
            return out

    @app.post("/collections/{collection_id}/move")
    def move_collection(
        collection_id: str,
        body: MoveBody,
        principal: Principal = Depends(current_principal),
    ):
        with store.begin() as session:
            c = catalog.move_collection(session, collection_id, body.new_parent_id, principal.id)
            return _collection_json(c)

    @app.post("/collections/{collection_id}/grants", status_code=201)
    def grant(
        collection_id: str,
        body: GrantBody,
        principal: Principal = Depends(current_principal),
    ):
        with store.begin() as session:
            g = catalog.grant_permission(
                session, collection_id, body.principal_id, body.level, principal.id
            )
            return {
                "collection_id": g.collection_id,
                "principal_id": g.principal_id,
                "level": g.level,
            }

    @app.post("/documents", status_code=201)
    def upload_document(
        file: UploadFile = File(...),
        kind: str = Form(...),
        collection_id: str = Form(...),
        title: str = Form(""),
        principal: Principal = Depends(current_principal),
    ):
        data = file.file.read()
        doc = components.pipeline.ingest_upload(
            caller_id=principal.id,
            collection_id=collection_id,
            title=title or (file.filename or "untitled"),
            data=data,
            kind=kind,
            media_type=file.content_type or "application/octet-stream",
        )
        with store.session() as session:
            return _document_json(doc, catalog.chunk_count(session, doc.id))

    @app.delete("/documents/{document_id}")
    def delete_document(
        document_id: str, principal: Principal = Depends(current_principal)
    ):
        removed = components.pipeline.delete_document(principal.id, document_id)
        return {"chunks_removed": removed}

    @app.post("/import/arxiv", status_code=201)
    def import_arxiv(
        body: ArxivImportBody, principal: Principal = Depends(current_principal)
    ):
        doc = components.pipeline.ingest_arxiv(
            caller_id=principal.id,
            collection_id=body.collection_id,
            record_or_id=body.id,
            title=body.title,
        )
        with store.session() as session:
            return _document_json(doc, catalog.chunk_count(session, doc.id))

    @app.post("/search")
    def search(body: SearchBody, principal: Principal = Depends(current_principal)):
        weights = components.weights
        if body.k is not None:
            weights = replace(weights, k=body.k)
        with store.session() as session:
            hits = components.index.hybrid_search(
                session, body.query, set(body.collection_ids), principal.id, weights
            )
            return {
                "hits": [
                    {
                        "chunk_id": h.chunk_id,
                        "document_id": h.document_id,
                        "collection_id": h.collection_id,
                        "cosine_score": h.cosine_score,
                        "trigram_score": h.trigram_score,
                        "fused_score": h.fused_score,
                        "snippet": h.snippet,
                    }
                    for h in hits
                ]
            }

    @app.websocket("/ws/chat")
    async def chat_socket(ws: WebSocket):
        await ws.accept()
        token = ws.query_params.get("token")
        if token is None:
            header = ws.headers.get("authorization", "")
            if header.lower().startswith("bearer "):
                token = header[7:].strip()
        try:
            principal = components.tokens.authenticate(token)
        except Unauthorized:
            await ws.close(code=4401, reason="unauthorized")
            return
        raw_ids = ws.query_params.get("collections", "")
        collection_ids = [c for c in raw_ids.split(",") if c]
        try:
            session = agent.new_session(principal.id, collection_ids)
        except (PermissionDenied, CollectionNotFound) as e:
            await ws.close(code=4403, reason=str(e)[:110])
            return
        await _chat_loop(ws, agent, session)

    return app


async def _chat_loop(ws: WebSocket, agent: ChatAgent, session: ChatSession) -> None:
    """Multiplex incoming frames with events from the running turn."""
    loop = asyncio.get_running_loop()
    queue: asyncio.Queue = asyncio.Queue()
    turn_running = False

    def pump(text: str) -> None:
        try:
            for event in agent.run_turn(session, text):
                loop.call_soon_threadsafe(queue.put_nowait, event.to_wire())
        except ConcurrentTurn as e:
            loop.call_soon_threadsafe(
                queue.put_nowait,
                {"type": "error", "code": "CONCURRENT_TURN", "message": str(e)},
            )
        except Exception as e:  # never kill the socket from the worker thread
            loop.call_soon_threadsafe(
                queue.put_nowait, {"type": "error", "code": "INTERNAL", "message": str(e)}
            )
        finally:
            loop.call_soon_threadsafe(queue.put_nowait, _TURN_DONE)

    async def handle_frame(raw: str) -> None:
        nonlocal turn_running
        try:
            frame = json.loads(raw)
        except (json.JSONDecodeError, TypeError):
            await ws.send_json(
                {"type": "error", "code": "BAD_FRAME", "message": "frame is not valid JSON"}
            )
            return
        if (
            not isinstance(frame, dict)
            or frame.get("type") != "user_message"
            or not isinstance(frame.get("text"), str)
        ):
            await ws.send_json(
                {
                    "type": "error",
                    "code": "BAD_FRAME",
                    "message": 'expected {"type": "user_message", "text": ...}',
                }
            )
            return
        if turn_running:
            await ws.send_json(
                {
                    "type": "error",
                    "code": "CONCURRENT_TURN",
                    "message": "a turn is already in flight on this connection",
                }
            )
            return
        ids = frame.get("collection_ids")
        if ids is not None:
            if not isinstance(ids, list) or not all(isinstance(c, str) for c in ids):
                await ws.send_json(
                    {
                        "type": "error",
                        "code": "BAD_FRAME",
                        "message": "collection_ids must be a list of strings",
                    }
                )
                return
            try:
                agent.update_scope(session, ids)
            except PermissionDenied as e:
                await ws.send_json(
                    {"type": "error", "code": "PERMISSION_DENIED", "message": str(e)}
                )
                return
            except CollectionNotFound as e:
                await ws.send_json(
                    {"type": "error", "code": "NOT_FOUND", "message": str(e)}
                )
                return
        turn_running = True
        loop.run_in_executor(None, pump, frame["text"])

    recv_task = asyncio.ensure_future(ws.receive_text())
    queue_task = asyncio.ensure_future(queue.get())
    try:
        while True:
            done, _pending = await asyncio.wait(
                {recv_task, queue_task}, return_when=asyncio.FIRST_COMPLETED
            )
            if queue_task in done:
                item = queue_task.result()
                if item is _TURN_DONE:
                    turn_running = False
                else:
                    await ws.send_json(item)
                queue_task = asyncio.ensure_future(queue.get())
            if recv_task in done:
                try:
                    raw = recv_task.result()
                except WebSocketDisconnect:
                    break
                await handle_frame(raw)
                recv_task = asyncio.ensure_future(ws.receive_text())
    finally:
        recv_task.cancel()
        queue_task.cancel()


def create_app_from_config(config: ServiceConfig) -> FastAPI:
    return create_app(build_components(config))
