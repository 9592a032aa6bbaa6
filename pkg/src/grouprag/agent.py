"""The RAG conversation loop.

A session scopes a conversation to a principal and a set of selected
collections. Each turn streams ChatEvents whose order always matches

    (tool_call tool_result)* token* (final | error)

The search tool re-checks collection visibility on every invocation, so
revoking access mid-session excludes the collection from later searches.

ChatEvent wire encoding (the socket contract, field names exactly as below):

    {"type": "token", "text": str}
    {"type": "tool_call", "name": str, "arguments": object}
    {"type": "tool_result", "name": str,
     "chunk_refs": [{"document_id": str, "chunk_id": str,
                     "title": str, "snippet": str}]}
    {"type": "final", "message_id": str}
    {"type": "error", "code": str, "message": str}
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

from . import catalog
from .catalog import PermissionLevel
from .db import Document, Store, new_id
from .errors import (
    ConcurrentTurn,
    GroupRagError,
    PermissionDenied,
    ProviderError,
    ProviderTimeout,
)
from .llm.messages import Conversation, Message, Role
from .llm.providers import ProviderAdapter
from .llm.tools import ToolParam, ToolRegistry, invoke_tool
from .search import FusionWeights, SearchIndex

DEFAULT_MAX_TOOL_ROUNDS = 8
SEARCH_TOOL_NAME = "search_collections"
KC_MIN, KC_MAX = 1, 20  # clamp bounds for the search tool's k

DEFAULT_SYSTEM_PROMPT = (
    "You are a research assistant for a research group's shared document "
    "collections. Before answering a question about the group's documents, "
    "call the search_collections tool, possibly several times with different "
    "queries, and ground your answer in the returned passages. Cite the "
    "document titles and chunk ids you relied on. If the search returns "
    "nothing relevant, say so."
)

TOOL_LIMIT_APOLOGY = (
    "I could not finish researching this within the allowed number of search "
    "rounds. Please narrow the question or try again."
)


# --- events -------------------------------------------------------------


@dataclass(frozen=True)
class ChunkRef:
    document_id: str
    chunk_id: str
    title: str
    snippet: str


@dataclass(frozen=True)
class TokenEvent:
    text: str
    type: str = field(default="token", init=False)

    def to_wire(self) -> dict:
        return {"type": "token", "text": self.text}


@dataclass(frozen=True)
class ToolCallEvent:
    name: str
    arguments: dict
    type: str = field(default="tool_call", init=False)

    def to_wire(self) -> dict:
        return {"type": "tool_call", "name": self.name, "arguments": self.arguments}


@dataclass(frozen=True)
class ToolResultEvent:
    name: str
    chunk_refs: tuple[ChunkRef, ...]
    type: str = field(default="tool_result", init=False)

    def to_wire(self) -> dict:
        return {
            "type": "tool_result",
            "name": self.name,
            "chunk_refs": [
                {
                    "document_id": r.document_id,
                    "chunk_id": r.chunk_id,
                    "title": r.title,
                    "snippet": r.snippet,
                }
                for r in self.chunk_refs
            ],
        }


@dataclass(frozen=True)
class FinalEvent:
    message_id: str
    type: str = field(default="final", init=False)

    def to_wire(self) -> dict:
        return {"type": "final", "message_id": self.message_id}


@dataclass(frozen=True)
class ErrorEvent:
    code: str
    message: str
    type: str = field(default="error", init=False)

    def to_wire(self) -> dict:
        return {"type": "error", "code": self.code, "message": self.message}


ChatEvent = TokenEvent | ToolCallEvent | ToolResultEvent | FinalEvent | ErrorEvent

CHAT_EVENT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "token"}, "text": {"type": "string"}},
            "required": ["type", "text"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "tool_call"},
                "name": {"type": "string"},
                "arguments": {"type": "object"},
            },
            "required": ["type", "name", "arguments"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "tool_result"},
                "name": {"type": "string"},
                "chunk_refs": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "document_id": {"type": "string"},
                            "chunk_id": {"type": "string"},
                            "title": {"type": "string"},
                            "snippet": {"type": "string"},
                        },
                        "required": ["document_id", "chunk_id", "title", "snippet"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["type", "name", "chunk_refs"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "final"},
                "message_id": {"type": "string"},
            },
            "required": ["type", "message_id"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "error"},
                "code": {"type": "string"},
                "message": {"type": "string"},
            },
            "required": ["type", "code", "message"],
            "additionalProperties": False,
        },
    ],
}


# --- sessions -----------------------------------------------------------


class ChatSession:
    def __init__(
        self,
        principal_id: str,
        selected_collections: set[str],
        conversation: Conversation,
        max_tool_rounds: int = DEFAULT_MAX_TOOL_ROUNDS,
    ):
        self.id = new_id()
        self.principal_id = principal_id
        self.selected_collections = set(selected_collections)
        self.conversation = conversation
        self.max_tool_rounds = max_tool_rounds
        self._turn_lock = threading.Lock()


class ChatAgent:
    """Owns the model-tool-model cycle over a search index and a provider."""

    def __init__(
        self,
        store: Store,
        index: SearchIndex,
        provider: ProviderAdapter,
        weights: FusionWeights | None = None,
        system_prompt: str = DEFAULT_SYSTEM_PROMPT,
        max_tool_rounds: int = DEFAULT_MAX_TOOL_ROUNDS,
    ):
        self.store = store
        self.index = index
        self.provider = provider
        self.weights = weights or FusionWeights()
        self.system_prompt = system_prompt
        self.max_tool_rounds = max_tool_rounds

    def new_session(
        self,
        principal_id: str,
        collection_ids: Sequence[str],
        system_prompt: str | None = None,
    ) -> ChatSession:
        """Start a session. Every selected collection must grant the
        principal at least VIEW; an empty selection is allowed (chat without
        retrieval)."""
        with self.store.session() as session:
            for cid in collection_ids:
                if (
                    catalog.effective_permission(session, principal_id, cid)
                    < PermissionLevel.VIEW
                ):
                    raise PermissionDenied(
                        f"principal {principal_id!r} lacks VIEW on collection {cid!r}"
                    )
        return ChatSession(
            principal_id=principal_id,
            selected_collections=set(collection_ids),
            conversation=Conversation(
                system_prompt=self.system_prompt if system_prompt is None else system_prompt
            ),
            max_tool_rounds=self.max_tool_rounds,
        )

    def update_scope(self, chat: ChatSession, collection_ids: Sequence[str]) -> None:
        """Re-point the session at a new collection selection (VIEW-checked)."""
        with self.store.session() as session:
            for cid in collection_ids:
                if (
                    catalog.effective_permission(session, chat.principal_id, cid)
                    < PermissionLevel.VIEW
                ):
                    raise PermissionDenied(
                        f"principal {chat.principal_id!r} lacks VIEW on collection {cid!r}"
                    )
        chat.selected_collections = set(collection_ids)

    # -- the search tool ------------------------------------------------

    def registry_for(self, chat: ChatSession) -> ToolRegistry:
        registry = ToolRegistry()
        agent = self

        def search_collections(query: str, k: int = self.weights.k):
            k = max(KC_MIN, min(KC_MAX, k))
            with agent.store.session() as session:
                visible = [
                    cid
                    for cid in sorted(chat.selected_collections)
                    if _safe_permission(session, chat.principal_id, cid)
                    >= PermissionLevel.VIEW
                ]
                if not visible:
                    return {
                        "error": {
                            "type": "empty_scope",
                            "message": "no collections selected",
                        }
                    }
                weights = replace(agent.weights, k=k)
                hits = agent.index.hybrid_search(
                    session, query, set(visible), chat.principal_id, weights
                )
                titles = _document_titles(session, [h.document_id for h in hits])
                return {
                    "chunks": [
                        {
                            "document_id": h.document_id,
                            "chunk_id": h.chunk_id,
                            "title": titles.get(h.document_id, ""),
                            "snippet": h.snippet,
                            "score": h.fused_score,
                        }
                        for h in hits
                    ]
                }

        registry.register(
            SEARCH_TOOL_NAME,
            "Search the user's selected document collections. Returns the "
            "most relevant text chunks with document titles and ids for citation.",
            [
                ToolParam("query", "string", "what to search for"),
                ToolParam(
                    "k",
                    "integer",
                    f"how many chunks to return (clamped to {KC_MIN}..{KC_MAX})",
                    required=False,
                ),
            ],
            search_collections,
        )
        return registry

    # -- the turn loop ----------------------------------------------------

    def run_turn(self, chat: ChatSession, user_text: str) -> Iterator[ChatEvent]:
        """Run one conversation turn, yielding events as they happen.

        One turn in flight per session; a second call while the first is
        still being consumed raises ConcurrentTurn.
        """
        if not chat._turn_lock.acquire(blocking=False):
            raise ConcurrentTurn("a turn is already in flight on this session")
        return self._turn_events(chat, user_text)

    def _turn_events(self, chat: ChatSession, user_text: str) -> Iterator[ChatEvent]:
        registry = self.registry_for(chat)
        conversation = chat.conversation
        try:
            conversation.append(Message(role=Role.USER, content=user_text))
            rounds = 0
            while True:
                chunks: list[str] = []
                try:
                    reply = self.provider.complete(
                        conversation, registry.descriptors(), on_token=chunks.append
                    )
                except ProviderTimeout as e:
                    yield ErrorEvent(code="PROVIDER_TIMEOUT", message=str(e))
                    return
                except ProviderError as e:
                    yield ErrorEvent(code="PROVIDER_ERROR", message=str(e))
                    return

                if reply.tool_calls:
                    if rounds >= chat.max_tool_rounds:
                        conversation.append(
                            Message(role=Role.ASSISTANT, content=TOOL_LIMIT_APOLOGY)
                        )
                        yield ErrorEvent(
                            code="TOOL_LIMIT",
                            message=f"tool-call limit of {chat.max_tool_rounds} rounds reached",
                        )
                        return
                    rounds += 1
                    conversation.append(reply)
                    for call in reply.tool_calls:
                        yield ToolCallEvent(
                            name=call.name, arguments=_parse_arguments(call.raw_arguments)
                        )
                        tool_message = invoke_tool(registry, call)
                        conversation.append(tool_message)
                        yield ToolResultEvent(
                            name=call.name, chunk_refs=_chunk_refs(tool_message.content)
                        )
                    continue

                index = conversation.append(reply)
                if chunks:
                    for chunk in chunks:
                        yield TokenEvent(text=chunk)
                elif reply.content:
                    yield TokenEvent(text=reply.content)
                yield FinalEvent(message_id=f"{conversation.id}:{index}")
                return
        finally:
            chat._turn_lock.release()


def _safe_permission(session, principal_id: str, collection_id: str) -> PermissionLevel:
    try:
        return catalog.effective_permission(session, principal_id, collection_id)
    except GroupRagError:
        return PermissionLevel.NONE


def _document_titles(session, document_ids: Sequence[str]) -> dict[str, str]:
    if not document_ids:
        return {}
    rows = session.query(Document.id, Document.title).filter(
        Document.id.in_(set(document_ids))
    )
    return {doc_id: title for doc_id, title in rows}


def _parse_arguments(raw: str) -> dict:
    try:
        parsed = json.loads(raw)
    except (json.JSONDecodeError, TypeError):
        return {"_raw": raw}
    return parsed if isinstance(parsed, dict) else {"_raw": raw}


def _chunk_refs(tool_content: str) -> tuple[ChunkRef, ...]:
    """Structural citations: lifted from the search tool's result payload."""
    try:
        payload = json.loads(tool_content)
    except (json.JSONDecodeError, TypeError):
        return ()
    if not isinstance(payload, dict):
        return ()
    refs = []
    for row in payload.get("chunks", ()):
        if isinstance(row, dict) and "chunk_id" in row and "document_id" in row:
            refs.append(
                ChunkRef(
                    document_id=str(row["document_id"]),
                    chunk_id=str(row["chunk_id"]),
                    title=str(row.get("title", "")),
                    snippet=str(row.get("snippet", "")),
                )
            )
    return tuple(refs)
